mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use epsfree_core::bounds::{report, ReportOptions, Variant};
use epsfree_core::certify::{certify, CertifyOptions};
use epsfree_core::coefficients::MatrixCoefficients;
use epsfree_core::estimator::{
    best_lower, clique_vector_bound, moment_estimate, truncated_norm_with, Budget, Method, NormEstimate,
};
use epsfree_core::lanczos::LanczosOptions;
use epsfree_core::moments::{depth_for_length, MomentEngine};
use epsfree_core::tensor::{khintchine_check_with, KhintchineCheck};
use epsfree_core::trace::DEFAULT_BASIS_CAP;
use epsfree_core::{Error, Family, Graph, TraceMonoid};
use output::{render_record, Cell, Format, Rows};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Environment variable read for the worker thread count when `--threads`
/// is not given.
const THREADS_ENV: &str = "EPSFREE_THREADS";

#[derive(Parser)]
#[command(name = "epsfree", version, about = "Operator-norm bounds for epsilon-free semicircular families")]
struct Cli {
    /// Worker threads [default: $EPSFREE_THREADS, else all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Graph JSON file: {"d": n, "edges": [[i, j], ...]}, 0-based
    #[arg(long)]
    graph: Option<PathBuf>,

    /// Named family with comma-separated parameters, e.g. cycle:6,
    /// complete_multipartite:2,2 or erdos_renyi:8,0.5
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    source: Source,

    /// Seed for random graph families and random coefficients
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormMethod {
    Lanczos,
    #[value(name = "moment_root", alias = "moments")]
    MomentRoot,
    #[value(name = "clique_vector", alias = "clique")]
    CliqueVector,
    /// Largest of the three
    Best,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Eigen,
    Regular,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form upper and lower bounds with consistency flags
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        /// Attach the best numerical lower bound, truncating at this depth
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        order: Option<usize>,
        #[arg(long = "clique-N")]
        clique_n: Option<u64>,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Certified numerical lower bound on the norm
    Norm {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "lanczos")]
        method: NormMethod,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value_t = 16)]
        order: usize,
        #[arg(long = "clique-N", default_value_t = 10_000)]
        clique_n: u64,
        /// Relative Lanczos tolerance
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Exact even moments of the sum and their roots
    Moments {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 8)]
        order: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Number of traces of each length
    Enumerate {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Graph JSON for a named family, e.g. `generate xy_model 6`
    Generate {
        family: String,
        params: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write to a file instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Truncated norm of sum_i a_i (x) s_i against the Khintchine-type bound
    Khintchine {
        #[command(flatten)]
        graph: GraphArgs,
        /// Coefficient JSON file
        #[arg(long, conflicts_with = "random")]
        coefficients: Option<PathBuf>,
        /// Draw random k x k coefficients from --seed instead
        #[arg(long, value_name = "K")]
        random: Option<usize>,
        #[arg(long, requires = "random")]
        real: bool,
        #[arg(long, requires = "random")]
        self_adjoint: bool,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, value_enum, default_value = "eigen")]
        variant: VariantArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Run the full invariant suite; exits 3 if any check fails
    Certify {
        #[command(flatten)]
        graph: GraphArgs,
        /// Largest Fock dimension to build
        #[arg(long, default_value_t = 20_000)]
        max_dim: usize,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Bounds over a family parameter range, one row per value
    Sweep {
        /// Family template with `{}` for the swept value, e.g. cycle:{}
        #[arg(long)]
        family: String,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Add the truncated norm at this depth
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
    Certify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome = Result<String, Failure>;

fn parse_family(spec: &str) -> Result<Family, Failure> {
    let (name, params) = spec.split_once(':').unwrap_or((spec, ""));
    let params: Vec<&str> = params.split(',').filter(|p| !p.trim().is_empty()).collect();
    Ok(Family::from_parts(name.trim(), &params)?)
}

fn load_graph(args: &GraphArgs) -> Result<Graph, Failure> {
    match (&args.source.graph, &args.source.family) {
        (Some(path), None) => Ok(Graph::load(path)?),
        (None, Some(spec)) => Ok(parse_family(spec)?.generate(args.seed)?),
        _ => Err(Failure::Usage("give exactly one of --graph and --family".into())),
    }
}

fn positive(name: &str, v: usize) -> Result<(), Failure> {
    if v == 0 {
        return Err(Failure::Usage(format!("--{name} must be positive")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

fn lanczos_estimate(g: &Graph, depth: usize, tol: f64) -> Result<NormEstimate, Error> {
    match truncated_norm_with(g, depth, &LanczosOptions::with_tol(tol), DEFAULT_BASIS_CAP) {
        Err(Error::NoConvergence { best, residual }) => {
            eprintln!("warning: Lanczos stopped at residual {residual:e}; the value is still a lower bound");
            Ok(NormEstimate {
                value: best.max(0.0),
                method: Method::Lanczos,
                depth_or_order: depth,
                certified_lower: true,
                residual,
            })
        }
        other => other,
    }
}

#[derive(Serialize)]
struct NormRecord {
    graph_id: String,
    d: usize,
    #[serde(flatten)]
    estimate: NormEstimate,
}

#[derive(Serialize)]
struct KhintchineRecord {
    graph_id: String,
    d: usize,
    k: usize,
    #[serde(flatten)]
    check: KhintchineCheck,
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Bounds { graph, depth, order, clique_n, format } => {
            let g = load_graph(&graph)?;
            let numerics = (depth.is_some() || order.is_some() || clique_n.is_some()).then(|| {
                let b = Budget::default();
                Budget {
                    max_depth: depth.unwrap_or(b.max_depth),
                    max_order: order.unwrap_or(b.max_order),
                    max_n: clique_n.unwrap_or(b.max_n),
                    ..b
                }
            });
            Ok(render_record(&report(&g, &ReportOptions { numerics })?, format))
        }
        Command::Norm { graph, method, depth, order, clique_n, tol, format } => {
            positive("depth", depth)?;
            check_tol(tol)?;
            let g = load_graph(&graph)?;
            let estimate = match method {
                NormMethod::Lanczos => lanczos_estimate(&g, depth, tol)?,
                NormMethod::MomentRoot => moment_estimate(&g, order, DEFAULT_BASIS_CAP)?,
                NormMethod::CliqueVector => clique_vector_bound(&g, &g.clique_number()?.witness, clique_n)?,
                NormMethod::Best => best_lower(
                    &g,
                    &Budget { max_depth: depth, max_order: order, max_n: clique_n, tol, ..Budget::default() },
                )?,
            };
            Ok(render_record(&NormRecord { graph_id: g.digest(), d: g.d(), estimate }, format))
        }
        Command::Moments { graph, order, format } => {
            positive("order", order)?;
            let g = load_graph(&graph)?;
            let seq = MomentEngine::new(&g, depth_for_length(order))?.sum_moments(order)?;
            let mut rows = Rows::new(vec!["order", "moment", "root"]);
            for (k, m, root) in seq.even_rows() {
                rows.push(vec![Cell::int(k), Cell::int(m), Cell::Num(root)]);
            }
            Ok(rows.render(format))
        }
        Command::Enumerate { graph, depth, format } => {
            let g = load_graph(&graph)?;
            let counts = TraceMonoid::new(&g).enumerate(depth, DEFAULT_BASIS_CAP)?.counts();
            let mut rows = Rows::new(vec!["length", "count", "cumulative"]);
            let mut total = 0usize;
            for (n, c) in counts.into_iter().enumerate() {
                total += c;
                rows.push(vec![Cell::int(n), Cell::int(c), Cell::int(total)]);
            }
            Ok(rows.render(format))
        }
        Command::Generate { family, params, seed, output } => {
            let fam = if params.is_empty() { parse_family(&family)? } else { Family::from_parts(&family, &params)? };
            let g = fam.generate(seed)?;
            match output {
                Some(path) => {
                    g.save(&path)?;
                    Ok(String::new())
                }
                None => Ok(g.to_json() + "\n"),
            }
        }
        Command::Khintchine { graph, coefficients, random, real, self_adjoint, depth, variant, tol, format } => {
            positive("depth", depth)?;
            check_tol(tol)?;
            let g = load_graph(&graph)?;
            let c = match (coefficients, random) {
                (Some(path), None) => MatrixCoefficients::load(path)?,
                (None, Some(k)) => {
                    positive("random", k)?;
                    let mut rng = ChaCha8Rng::seed_from_u64(graph.seed.unwrap_or(0));
                    MatrixCoefficients::random(&mut rng, g.d(), k, real, self_adjoint)
                }
                _ => return Err(Failure::Usage("give exactly one of --coefficients and --random".into())),
            };
            let variant = match variant {
                VariantArg::Eigen => Variant::Eigen,
                VariantArg::Regular => Variant::Regular,
            };
            let check =
                khintchine_check_with(&c, &g, depth, variant, &LanczosOptions::with_tol(tol), DEFAULT_BASIS_CAP)?;
            Ok(render_record(&KhintchineRecord { graph_id: g.digest(), d: g.d(), k: c.k(), check }, format))
        }
        Command::Certify { graph, max_dim, format } => {
            positive("max-dim", max_dim)?;
            let g = load_graph(&graph)?;
            let r = certify(&g, &CertifyOptions { max_dim, ..CertifyOptions::default() })?;
            let text = render_record(&r, format);
            if r.all_passed() {
                Ok(text)
            } else {
                print!("{text}");
                let names: Vec<&str> = r.failures().map(|f| f.name.as_str()).collect();
                Err(Failure::Certify(names.join("; ")))
            }
        }
        Command::Sweep { family, from, to, step, seed, depth, tol, format } => {
            positive("step", step)?;
            check_tol(tol)?;
            if !family.contains("{}") {
                return Err(Failure::Usage("--family template needs a {} placeholder".into()));
            }
            if from > to {
                return Err(Failure::Usage(format!("empty range {from}..={to}")));
            }
            let mut columns = vec![
                "param",
                "d",
                "edges",
                "lambda1",
                "lambda2",
                "omega",
                "is_connected",
                "is_regular",
                "upper_eigen",
                "upper_regular",
                "upper_clique_eigen",
                "lower_clique",
                "lower_free",
                "haar_upper",
                "benchmark",
            ];
            if depth.is_some() {
                columns.push("lanczos");
            }
            let mut rows = Rows::new(columns);
            for p in (from..=to).step_by(step) {
                let g = parse_family(&family.replace("{}", &p.to_string()))?.generate(seed)?;
                let r = report(&g, &ReportOptions::default())?;
                let mut row = vec![
                    Cell::int(p),
                    Cell::int(r.d),
                    Cell::int(r.edges),
                    Cell::Num(r.lambda1),
                    Cell::opt(r.lambda2),
                    Cell::int(r.omega),
                    Cell::int(r.is_connected as u8),
                    Cell::int(r.is_regular as u8),
                    Cell::Num(r.upper_eigen),
                    Cell::opt(r.upper_regular),
                    Cell::Num(r.upper_clique_eigen),
                    Cell::Num(r.lower_clique),
                    Cell::Num(r.lower_free),
                    Cell::Num(r.haar_upper),
                    Cell::Num(r.benchmark),
                ];
                if let Some(depth) = depth {
                    row.push(Cell::Num(lanczos_estimate(&g, depth, tol)?.value));
                }
                rows.push(row);
            }
            Ok(rows.render(format))
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| Failure::Usage(format!("{THREADS_ENV}='{v}' is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        positive("threads", n)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = configure_threads(cli.threads).and_then(|()| run(cli.command));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_resource_limit() { 2 } else { 1 })
        }
        Err(Failure::Certify(names)) => {
            eprintln!("certify failed: {names}");
            ExitCode::from(3)
        }
    }
}
