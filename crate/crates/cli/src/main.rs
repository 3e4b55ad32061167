mod bench;
mod error;
mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use zonoverify::approx::{approx_lp_norm_max, order_reduce, ReduceOptions, DEFAULT_REPETITIONS, DEFAULT_SAMPLING_CONSTANT};
use zonoverify::icnn::icnn_lipschitz;
use zonoverify::linalg::{add, dot};
use zonoverify::lp::Polyhedron;
use zonoverify::network::ReluNetwork;
use zonoverify::norm::{NormValue, PNorm};
use zonoverify::reduce::{
    brute_force_clique, clique_to_lipschitz_instance, clique_to_network, clique_to_positivity_instance,
    clique_value, ColoredGraph, Exponent,
};
use zonoverify::verify::{
    lipschitz_exact, max_over_polyhedron, positivity, surjectivity, verify_io, zero_function_check, MaxOutcome,
};
use zonoverify::zonotope::Zonotope;
use zonoverify::Rational;

use crate::bench::{BenchKind, BenchPlan};
use crate::error::{CliError, CliResult};
use crate::input::{load, load_nested};

/// Exact verification of small ReLU networks and zonotopes.
///
/// Results are JSON on standard output; verdicts are data, and the exit
/// code is nonzero only when a result could not be computed (2: invalid
/// input, 3: resource guard).
#[derive(Parser, Debug)]
#[command(name = "zonoverify", version)]
struct Cli {
    /// Write the result JSON to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is the network positive somewhere?
    VerifyPositivity {
        #[arg(long)]
        network: PathBuf,
    },
    /// Is a one-hidden-layer network onto the reals?
    VerifySurjectivity {
        #[arg(long)]
        network: PathBuf,
    },
    /// Does the network vanish everywhere?
    VerifyZero {
        #[arg(long)]
        network: PathBuf,
    },
    /// Maximum of the network over a polyhedron.
    Max {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        domain: PathBuf,
    },
    /// Does the network map the polyhedron into [lo, hi]?
    VerifyIo {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<Rational>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<Rational>,
    },
    /// Exact L_p Lipschitz constant by region enumeration.
    Lipschitz {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        p: PNorm,
    },
    /// L_1 or L_inf Lipschitz constant of an input-convex network by LPs.
    IcnnLipschitz {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        p: PNorm,
    },
    /// Is the inner zonotope contained in the outer one?
    ZonoContain {
        #[arg(long)]
        inner: PathBuf,
        #[arg(long)]
        outer: PathBuf,
    },
    /// Maximum L_p norm over a zonotope.
    ZonoLpmax {
        #[arg(long)]
        zonotope: PathBuf,
        #[arg(long)]
        p: PNorm,
    },
    /// Randomized order reduction.
    ZonoReduce {
        #[arg(long)]
        zonotope: PathBuf,
        #[arg(long)]
        epsilon: Rational,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Approximate maximum L_p norm over a zonotope via order reduction.
    ZonoApproxMax {
        #[arg(long)]
        zonotope: PathBuf,
        #[arg(long)]
        p: PNorm,
        #[arg(long)]
        epsilon: Rational,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Build a hardness instance from a colored graph.
    GenCliqueInstance {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "positivity")]
        kind: InstanceChoice,
        /// Exponent for the Lipschitz instance (`inf` or a positive rational).
        #[arg(long, default_value = "inf")]
        p: Exponent,
    },
    /// Find a multicolored clique.
    SolveClique {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "brute-force")]
        method: CliqueMethod,
    },
    /// Scaling benchmark; prints JSON Lines.
    Bench {
        #[arg(long, value_enum)]
        kind: BenchKind,
        #[arg(long, default_value_t = 1)]
        d_min: usize,
        #[arg(long, default_value_t = 3)]
        d_max: usize,
        #[arg(long, default_value_t = 1)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Skip grid points whose generic count is larger than this.
        #[arg(long, default_value_t = 1_000_000)]
        max_count: usize,
        #[arg(long, default_value_t = 600.0)]
        budget_seconds: f64,
        /// Worker threads (1 keeps timings comparable).
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Also append each record to this file.
        #[arg(long)]
        append: Option<PathBuf>,
    },
}

#[derive(clap::Args, Debug)]
struct Sampling {
    /// Random seed; one is generated and reported if absent.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SAMPLING_CONSTANT)]
    sampling_constant: f64,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    repetitions: usize,
}

impl Sampling {
    fn options(&self) -> ReduceOptions {
        ReduceOptions { sampling_constant: self.sampling_constant, repetitions: self.repetitions }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InstanceChoice {
    RawSum,
    Positivity,
    Lipschitz,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliqueMethod {
    BruteForce,
    /// maximize the reduction network over the label box and decode
    Reduction,
}

fn network(path: &Path) -> CliResult<ReluNetwork> {
    load_nested(path, "network", "layers")
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn check(ok: bool, what: &str) -> CliResult<()> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Certificate(what.to_string()))
    }
}

fn norm_matches(p: &PNorm, gradient: &[Rational], value: &NormValue) -> bool {
    gradient.is_empty() || p.dual().eval(gradient) == *value
}

fn run(command: Command) -> CliResult<Value> {
    Ok(match command {
        Command::VerifyPositivity { network: path } => {
            let net = network(&path)?;
            let out = positivity(&net)?;
            if let Some(x) = &out.witness {
                check(net.evaluate(x)?.is_positive(), "positivity witness")?;
            }
            to_value(&out)
        }
        Command::VerifySurjectivity { network: path } => {
            let net = network(&path)?;
            let out = surjectivity(&net)?;
            let stripped = net.strip_biases();
            if let Some(x) = &out.positive {
                check(stripped.evaluate(x)?.is_positive(), "positive witness")?;
            }
            if let Some(x) = &out.negative {
                check(stripped.evaluate(x)?.is_negative(), "negative witness")?;
            }
            to_value(&out)
        }
        Command::VerifyZero { network: path } => {
            let net = network(&path)?;
            let out = zero_function_check(&net)?;
            if let Some(x) = &out.witness {
                check(!net.evaluate(x)?.is_zero(), "nonzero witness")?;
            }
            to_value(&out)
        }
        Command::Max { network: path, domain } => {
            let net = network(&path)?;
            let domain: Polyhedron = load(&domain)?;
            let out = max_over_polyhedron(&net, &domain)?;
            match &out {
                MaxOutcome::Attained { value, argmax } => {
                    check(domain.contains(argmax) && net.evaluate(argmax)? == *value, "argmax")?;
                }
                MaxOutcome::Unbounded { point, ray } => {
                    let recedes = domain.constraints().all(|(row, _)| !dot(row, ray).is_positive());
                    let grows = net.evaluate(&add(point, ray))? > net.evaluate(point)?;
                    check(domain.contains(point) && recedes && grows, "unbounded ray")?;
                }
                MaxOutcome::Infeasible => {}
            }
            to_value(&out)
        }
        Command::VerifyIo { network: path, domain, lo, hi } => {
            let net = network(&path)?;
            let domain: Polyhedron = load(&domain)?;
            let out = verify_io(&net, &domain, lo.as_ref(), hi.as_ref())?;
            if let Some(x) = &out.counterexample {
                let v = net.evaluate(x)?;
                let outside = lo.as_ref().is_some_and(|l| v < *l) || hi.as_ref().is_some_and(|h| v > *h);
                check(domain.contains(x) && outside, "counterexample")?;
            }
            to_value(&out)
        }
        Command::Lipschitz { network: path, p } => {
            let net = network(&path)?;
            let out = lipschitz_exact(&net, &p)?;
            check(norm_matches(&p, &out.gradient, &out.value), "gradient norm")?;
            json!({ "p": p, "value": out.value, "value_f64": out.value.to_f64(), "gradient": out.gradient })
        }
        Command::IcnnLipschitz { network: path, p } => {
            let net = network(&path)?;
            let out = icnn_lipschitz(&net, &p)?;
            check(norm_matches(&p, &out.gradient, &NormValue::Exact(out.value.clone())), "gradient norm")?;
            json!({ "p": p, "value": out.value, "gradient": out.gradient, "lp_count": out.lp_count })
        }
        Command::ZonoContain { inner, outer } => {
            let inner: Zonotope = load(&inner)?;
            let outer: Zonotope = load(&outer)?;
            let out = Zonotope::containment(&inner, &outer)?;
            if let (Some(w), Some(sep)) = (&out.witness, &out.separator) {
                check(inner.contains(w)? && sep.separates(w, &outer), "separating hyperplane")?;
            }
            to_value(&out)
        }
        Command::ZonoLpmax { zonotope, p } => {
            let z: Zonotope = load(&zonotope)?;
            let out = z.lp_norm_max(&p);
            check(z.contains(&out.argmax)? && p.eval(&out.argmax) == out.value, "maximizer")?;
            json!({ "p": p, "value": out.value, "value_f64": out.value.to_f64(), "argmax": out.argmax })
        }
        Command::ZonoReduce { zonotope, epsilon, sampling } => {
            let z: Zonotope = load(&zonotope)?;
            let seed = seed_or_fresh(sampling.seed);
            let out = order_reduce(&z, &epsilon, seed, &sampling.options())?;
            json!({
                "seed": seed,
                "epsilon": epsilon,
                "sample_size": out.sample_size,
                "input_generators": z.num_generators(),
                "zonotope": out.zonotope,
                "embedding": out.embedding,
            })
        }
        Command::ZonoApproxMax { zonotope, p, epsilon, sampling } => {
            let z: Zonotope = load(&zonotope)?;
            let seed = seed_or_fresh(sampling.seed);
            let (alpha, argmax) = approx_lp_norm_max(&z, &p, &epsilon, seed, &sampling.options())?;
            check(p.eval(&argmax) == alpha, "maximizer")?;
            json!({ "seed": seed, "p": p, "epsilon": epsilon, "alpha": alpha, "alpha_f64": alpha.to_f64(), "argmax": argmax })
        }
        Command::GenCliqueInstance { graph, kind, p } => {
            let g: ColoredGraph = load(&graph)?;
            let inst = match kind {
                InstanceChoice::RawSum => clique_to_network(&g)?,
                InstanceChoice::Positivity => clique_to_positivity_instance(&g)?,
                InstanceChoice::Lipschitz => clique_to_lipschitz_instance(&g, &p)?,
            };
            to_value(&inst)
        }
        Command::SolveClique { graph, method } => {
            let g: ColoredGraph = load(&graph)?;
            let clique = match method {
                CliqueMethod::BruteForce => brute_force_clique(&g)?,
                CliqueMethod::Reduction => clique_by_reduction(&g)?,
            };
            if let Some(c) = &clique {
                check(g.is_clique(c), "clique")?;
            }
            json!({ "clique": clique })
        }
        Command::Bench { .. } => unreachable!("handled separately"),
    })
}

/// A clique exists iff the raw-sum network reaches `k + C(k,2)` on the
/// label box; at such a maximizer every coordinate is a node label.
fn clique_by_reduction(g: &ColoredGraph) -> CliResult<Option<Vec<usize>>> {
    let inst = clique_to_network(g)?;
    let MaxOutcome::Attained { value, argmax } = max_over_polyhedron(&inst.network, &inst.label_box())? else {
        return Err(CliError::Certificate("label box maximum not attained".into()));
    };
    if value != clique_value(g.k()) {
        return Ok(None);
    }
    let nodes = argmax
        .iter()
        .enumerate()
        .map(|(c, x)| {
            let i = inst.labels.per_color[c].iter().position(|&w| Rational::from_integer(w as i64) == *x);
            i.map(|i| g.colors()[c][i]).ok_or_else(|| CliError::Certificate(format!("coordinate {c} is not a label")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Some(nodes))
}

fn write_result(value: &Value, output: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    match output {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bench { kind, d_min, d_max, n_min, n_max, seed, max_count, budget_seconds, threads, append } => {
            let seed = seed_or_fresh(seed);
            eprintln!("bench seed {seed}");
            let plan = BenchPlan { kind, d_range: (d_min, d_max), n_range: (n_min, n_max), seed, max_count, budget_seconds };
            match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
                Ok(pool) => pool.install(|| bench::run(&plan, append.as_deref())).map(|_| ()),
                Err(e) => Err(CliError::Write(std::io::Error::other(e))),
            }
        }
        command => {
            let start = Instant::now();
            run(command).and_then(|mut value| {
                if let Value::Object(map) = &mut value {
                    map.insert("elapsed_seconds".into(), json!(start.elapsed().as_secs_f64()));
                }
                write_result(&value, cli.output.as_deref())
            })
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
