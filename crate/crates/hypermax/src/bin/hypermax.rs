//! Thin command-line front end over the library. Every subcommand reads
//! and writes the text formats defined in `hypermax::io`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypermax::error::Error;
use hypermax::experiment::{
    aggregate, run_experiment, sample_complexity_factor, verify_error_bound,
};
use hypermax::graph::ramanujan_threshold;
use hypermax::hypergraph::{build_quasi_hypergraph, build_walk_hypergraph, random_subsets};
use hypermax::maxq::{error_bound_constant, error_bound_rhs, incoherent_bound, rank_bound};
use hypermax::solver::{coordinate_descent, Observations};
use hypermax::{io, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "hypermax",
    version,
    about = "Tensor completion from hypergraph-expander samples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random d-regular graph and write its edge list.
    GenGraph(GenGraphArgs),
    /// Generate a random bipartite biregular graph.
    GenBigraph(GenBigraphArgs),
    /// Print the measured second eigenvalue of a graph file.
    Spectra(SpectraArgs),
    /// Expand a base graph into its walk hypergraph edge list.
    BuildHypergraph(BuildHypergraphArgs),
    /// Fuzz the mixing inequality on random subset tuples, emitting CSV.
    VerifyMixing(VerifyMixingArgs),
    /// Generate a synthetic low-rank tensor (factors, optionally dense).
    GenTensor(GenTensorArgs),
    /// Observe a tensor on a hyperedge mask, optionally with noise.
    Sample(SampleArgs),
    /// Run one completion solve, writing factors and a trace CSV.
    Complete(CompleteArgs),
    /// Run an experiment grid from a spec file, writing results CSV.
    Experiment(ExperimentArgs),
    /// Print the bound calculators for given parameters.
    ReportBounds(ReportBoundsArgs),
}

#[derive(Args)]
struct GenGraphArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenBigraphArgs {
    #[arg(long)]
    n1: usize,
    #[arg(long)]
    n2: usize,
    #[arg(long)]
    d1: usize,
    #[arg(long)]
    d2: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpectraArgs {
    /// Graph file; regular ("n d" header) or bipartite ("n1 n2 d1 d2").
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct BuildHypergraphArgs {
    /// Regular base graph edge list.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Chain of bipartite graph files (quasi-regular hypergraph).
    #[arg(long, value_delimiter = ',')]
    chain: Vec<PathBuf>,
    /// Hypergraph order; required with --graph.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyMixingArgs {
    /// Materialized hyperedge file (used for the crossing counts).
    #[arg(long)]
    hypergraph: PathBuf,
    /// Regular base graph supplying lambda and d for the bounds.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Bipartite chain files supplying the per-link bounds.
    #[arg(long, value_delimiter = ',')]
    chain: Vec<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenTensorArgs {
    /// Dimensions, comma separated (e.g. 40,40,40).
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the CP factors.
    #[arg(long)]
    out_factors: PathBuf,
    /// Optionally also write the dense tensor.
    #[arg(long)]
    out_tensor: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Truth as a factor file...
    #[arg(long)]
    factors: Option<PathBuf>,
    /// ...or as a dense tensor file.
    #[arg(long)]
    tensor: Option<PathBuf>,
    #[arg(long)]
    edges: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompleteArgs {
    /// Dense tensor holding the observed values...
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// ...sampled at these hyperedges.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// Or a combined observations file (edges with values).
    #[arg(long)]
    obs: Option<PathBuf>,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_factors: PathBuf,
    #[arg(long)]
    out_trace: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment spec file (key = value lines).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportBoundsArgs {
    #[arg(long)]
    t: usize,
    #[arg(long)]
    r: usize,
    /// Target mean squared error for the sample-count factor.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    /// Incoherence constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Optional measured second eigenvalue for the error bound.
    #[arg(long)]
    lambda: Option<f64>,
    /// Base degree matching --lambda.
    #[arg(long)]
    d: Option<usize>,
    /// Certified max-quasinorm upper bound of the truth.
    #[arg(long)]
    maxq: Option<f64>,
    /// Observed sample count to print alongside the factor.
    #[arg(long)]
    edges: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenGraph(a) => {
            let g = hypermax::graph::random_regular(a.n, a.d, a.seed)?;
            io::write_regular_graph(&a.out, &g)?;
            println!(
                "wrote {}-regular graph on {} vertices to {}",
                a.d,
                a.n,
                a.out.display()
            );
            Ok(())
        }
        Command::GenBigraph(a) => {
            let g = hypermax::graph::random_biregular(a.n1, a.n2, a.d1, a.d2, a.seed)?;
            io::write_bipartite_graph(&a.out, &g)?;
            println!(
                "wrote ({},{})-biregular graph on {}+{} vertices to {}",
                a.d1,
                a.d2,
                a.n1,
                a.n2,
                a.out.display()
            );
            Ok(())
        }
        Command::Spectra(a) => spectra(&a.input),
        Command::BuildHypergraph(a) => build_hypergraph(a),
        Command::VerifyMixing(a) => verify_mixing(a),
        Command::GenTensor(a) => {
            let (factors, dense) = hypermax::experiment::gen_synthetic(&a.dims, a.r, a.seed)?;
            io::write_factors(&a.out_factors, &factors)?;
            println!("wrote rank-{} factors to {}", a.r, a.out_factors.display());
            if let Some(path) = a.out_tensor {
                match dense {
                    Some(t) => {
                        io::write_tensor(&path, &t)?;
                        println!("wrote dense tensor to {}", path.display());
                    }
                    None => {
                        return Err(Error::SizeCap(
                            "tensor too large to materialize; only factors were written".into(),
                        ))
                    }
                }
            }
            Ok(())
        }
        Command::Sample(a) => sample(a),
        Command::Complete(a) => complete(a),
        Command::Experiment(a) => {
            let spec = io::read_experiment_spec(&a.spec)?;
            let rows = run_experiment(&spec)?;
            io::write_results_csv(&a.out, &rows)?;
            println!("wrote {} rows to {}", rows.len(), a.out.display());
            let audited = rows
                .iter()
                .filter(|r| r.error.is_none() && spec.noise_level == 0.0)
                .filter(|r| verify_error_bound(r))
                .count();
            println!("error-bound audit: {audited} rows satisfy the spectral bound");
            for s in aggregate(&rows) {
                println!(
                    "d={} r_fit={}: mean gen error {:.4} +- {:.4} over {} runs ({} failed)",
                    s.d, s.r_fit, s.mean_gen_error, s.stderr, s.runs, s.failures
                );
            }
            Ok(())
        }
        Command::ReportBounds(a) => report_bounds(a),
    }
}

fn spectra(path: &std::path::Path) -> Result<()> {
    // sniff the header arity to pick the graph kind
    let text = std::fs::read_to_string(path)?;
    let header_len = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().count())
        .unwrap_or(0);
    match header_len {
        2 => {
            let g = io::read_regular_graph(path)?;
            let lambda = g.second_eigenvalue()?;
            println!("n = {}, d = {}", g.n(), g.degree());
            println!("lambda = {lambda}");
            println!(
                "ramanujan threshold 2*sqrt(d-1) = {}",
                ramanujan_threshold(g.degree())
            );
            Ok(())
        }
        4 => {
            let g = io::read_bipartite_graph(path)?;
            let lambda = g.second_singular()?;
            println!(
                "n1 = {}, n2 = {}, d1 = {}, d2 = {}",
                g.n1(),
                g.n2(),
                g.d1(),
                g.d2()
            );
            println!("lambda = {lambda}");
            println!(
                "ramanujan threshold sqrt(d1-1)+sqrt(d2-1) = {}",
                ((g.d1() as f64) - 1.0).sqrt() + ((g.d2() as f64) - 1.0).sqrt()
            );
            Ok(())
        }
        _ => Err(Error::Parse("unrecognized graph header".into())),
    }
}

fn build_hypergraph(a: BuildHypergraphArgs) -> Result<()> {
    let edges = match (&a.graph, a.chain.is_empty()) {
        (Some(path), true) => {
            let t =
                a.t.ok_or_else(|| Error::InvalidArgument("--t is required with --graph".into()))?;
            let g = io::read_regular_graph(path)?;
            let h = build_walk_hypergraph(g, t)?;
            h.materialize()?
        }
        (None, false) => {
            let chain = a
                .chain
                .iter()
                .map(|p| io::read_bipartite_graph(p))
                .collect::<Result<Vec<_>>>()?;
            let h = build_quasi_hypergraph(chain)?;
            h.materialize()?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --graph or --chain".into(),
            ))
        }
    };
    io::write_hyperedges(&a.out, &edges)?;
    println!("wrote {} hyperedges to {}", edges.len(), a.out.display());
    Ok(())
}

fn verify_mixing(a: VerifyMixingArgs) -> Result<()> {
    let edges = io::read_hyperedges(&a.hypergraph)?;
    let t = edges.arity();
    enum Bounds {
        Regular { lambda: f64, d: f64 },
        Quasi { lambdas: Vec<f64>, ds: Vec<usize> },
    }
    let bounds = match (&a.graph, a.chain.is_empty()) {
        (Some(path), true) => {
            let g = io::read_regular_graph(path)?;
            Bounds::Regular {
                lambda: g.second_eigenvalue()?,
                d: g.degree() as f64,
            }
        }
        (None, false) => {
            let chain = a
                .chain
                .iter()
                .map(|p| io::read_bipartite_graph(p))
                .collect::<Result<Vec<_>>>()?;
            let lambdas = chain
                .iter()
                .map(|g| g.second_singular())
                .collect::<Result<Vec<_>>>()?;
            let ds = chain.iter().flat_map(|g| [g.d1(), g.d2()]).collect();
            Bounds::Quasi { lambdas, ds }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --graph or --chain for the spectral bounds".into(),
            ))
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let header: Vec<String> = (1..=t).map(|i| format!("alpha{i}")).collect();
    println!(
        "trial,{},discrepancy,tight_bound,crude_bound,violated",
        header.join(",")
    );
    let mut violations = 0usize;
    for trial in 0..a.trials {
        let subsets = random_subsets(edges.dims(), &mut rng);
        let alphas: Vec<f64> = subsets
            .iter()
            .map(|s| s.iter().filter(|&&b| b).count() as f64 / s.len() as f64)
            .collect();
        let count = edges.count_crossing(&subsets)?;
        let density: f64 = alphas.iter().product();
        let disc = (count as f64 / edges.len() as f64 - density).abs();
        let (tight, crude) = match &bounds {
            Bounds::Regular { lambda, d } => {
                hypermax::hypergraph::mixing_bound_regular(t, &alphas, *lambda, *d)
            }
            Bounds::Quasi { lambdas, ds } => {
                hypermax::hypergraph::mixing_bound_quasi(t, &alphas, lambdas, ds)
            }
        };
        let violated = disc > tight + 1e-12;
        if violated {
            violations += 1;
        }
        let alpha_cells: Vec<String> = alphas.iter().map(|v| v.to_string()).collect();
        println!(
            "{trial},{},{disc},{tight},{crude},{violated}",
            alpha_cells.join(",")
        );
    }
    eprintln!("{violations} violations in {} trials", a.trials);
    if violations > 0 {
        return Err(Error::Solver(format!("{violations} mixing violations")));
    }
    Ok(())
}

fn sample(a: SampleArgs) -> Result<()> {
    let mask = io::read_hyperedges(&a.edges)?;
    let obs = match (&a.factors, &a.tensor) {
        (Some(path), None) => {
            let f = io::read_factors(path)?;
            hypermax::experiment::sample_observations(&f, &mask, a.noise, a.seed)?
        }
        (None, Some(path)) => {
            let t = io::read_tensor(path)?;
            if t.dims() != mask.dims() {
                return Err(Error::ShapeMismatch(format!(
                    "tensor dims {:?} vs mask dims {:?}",
                    t.dims(),
                    mask.dims()
                )));
            }
            // read values straight off the dense tensor, then perturb
            let values: Vec<f64> = mask
                .iter()
                .map(|tuple| {
                    let idx: Vec<usize> = tuple.iter().map(|&v| v as usize).collect();
                    t.get(&idx)
                })
                .collect();
            let clean = Observations::new(mask.clone(), values)?;
            if a.noise > 0.0 {
                // route through the noise machinery via a rank-1 trick is
                // not possible for dense input; perturb directly instead
                use rand::Rng;
                let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
                let amp = a.noise * 3.0f64.sqrt();
                let mut noise: Vec<f64> =
                    (0..clean.len()).map(|_| rng.gen_range(-amp..amp)).collect();
                let rms = (noise.iter().map(|v| v * v).sum::<f64>() / noise.len() as f64).sqrt();
                if rms > a.noise {
                    let s = a.noise / rms;
                    noise.iter_mut().for_each(|v| *v *= s);
                }
                let values: Vec<f64> = clean
                    .values()
                    .iter()
                    .zip(&noise)
                    .map(|(z, nu)| z + nu)
                    .collect();
                Observations::new(mask, values)?
            } else {
                clean
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give exactly one of --factors or --tensor".into(),
            ))
        }
    };
    io::write_observations(&a.out, &obs)?;
    println!("wrote {} observations to {}", obs.len(), a.out.display());
    Ok(())
}

fn complete(a: CompleteArgs) -> Result<()> {
    let cfg = io::read_solver_config(&a.config)?;
    let obs = match (&a.obs, &a.tensor, &a.edges) {
        (Some(path), None, None) => io::read_observations(path)?,
        (None, Some(tensor), Some(edges)) => {
            let t = io::read_tensor(tensor)?;
            let mask = io::read_hyperedges(edges)?;
            if t.dims() != mask.dims() {
                return Err(Error::ShapeMismatch(format!(
                    "tensor dims {:?} vs mask dims {:?}",
                    t.dims(),
                    mask.dims()
                )));
            }
            let values: Vec<f64> = mask
                .iter()
                .map(|tuple| {
                    let idx: Vec<usize> = tuple.iter().map(|&v| v as usize).collect();
                    t.get(&idx)
                })
                .collect();
            Observations::new(mask, values)?
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give --obs, or both --tensor and --edges".into(),
            ))
        }
    };
    let (factors, trace) = coordinate_descent(&obs, &cfg)?;
    io::write_factors(&a.out_factors, &factors)?;
    println!(
        "solve finished: {} outer iterations, converged = {}",
        trace.iters, trace.converged
    );
    if let Some(last) = trace.rows.last() {
        println!(
            "final cost {:.6e}, residual {:.6e}, max-qnorm bound {:.6e}",
            last.cost, last.resid_norm, last.maxq_ub
        );
    }
    if let Some(path) = a.out_trace {
        io::write_trace_csv(&path, &trace)?;
        println!("wrote trace to {}", path.display());
    }
    Ok(())
}

fn report_bounds(a: ReportBoundsArgs) -> Result<()> {
    println!("rank bound r^((t^2-t-1)/2) = {}", rank_bound(a.t, a.r)?);
    println!(
        "incoherent bound C^t r^(t/2) = {} (C = {})",
        incoherent_bound(a.c, a.t, a.r)?,
        a.c
    );
    println!("error constant C_t = {}", error_bound_constant(a.t));
    println!(
        "sample-count factor r^(2(t-1)(t^2-t-1))/eps^(2(t-1)) = {} (big-O constant omitted)",
        sample_complexity_factor(a.t, a.r, a.eps)?
    );
    if let Some(edges) = a.edges {
        println!("observed samples |E| = {edges}");
    }
    if let (Some(lambda), Some(d), Some(maxq)) = (a.lambda, a.d, a.maxq) {
        println!(
            "mean-squared-error bound C_t maxq^2 lambda/d = {}",
            error_bound_rhs(a.t, maxq, lambda, d as f64)
        );
    }
    Ok(())
}
