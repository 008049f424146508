//! `treepgf`: exact search-cost distributions, moments, cumulants,
//! asymptotic constants, enumeration and simulation for random binary
//! and digital search trees.
//!
//! Every command prints one JSON envelope {command, params, payload,
//! version, elapsed_ms} on stdout (`--format table` flattens it for
//! reading). Rationals are canonical strings, certified reals carry
//! their precision. Exit codes: 0 success, 1 verification mismatch,
//! 2 usage error.

use std::io::{self, Write};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use treepgf_core::asymptotics::{self, Family};
use treepgf_core::cumulants;
use treepgf_core::dst::{KeyModel, SearchKind};
use treepgf_core::enumeration;
use treepgf_core::montecarlo::{self, SimConfig, DEFAULT_SEED};
use treepgf_core::verify::{self, Tier};
use treepgf_core::{bst, dst, Pgf, RealCtx};

#[derive(Parser)]
#[command(
    name = "treepgf",
    version,
    about = "Exact distributions, moments, cumulants and asymptotics for search costs in random binary and digital search trees"
)]
struct Cli {
    /// Worker threads for enumeration and simulation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Cmd {
    /// Binary search tree distributions and moments.
    Bst {
        #[command(subcommand)]
        cmd: BstCmd,
    },
    /// Digital search tree distributions, moments and enumeration.
    Dst {
        #[command(subcommand)]
        cmd: DstCmd,
    },
    /// Exact recurrence tables c_s, a_s and cumulant leading constants.
    Cumulants {
        #[arg(long, default_value_t = 8)]
        max_order: u32,
        /// Decimal digits for the leading constants.
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
    /// Certified digits of the named limit constants.
    Constants {
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
    /// Exact-vs-prediction convergence report for one moment family.
    Asymptotics {
        /// One of: bst-unsucc-mean, bst-unsucc-var, bst-succ-mean,
        /// bst-succ-var, bst-L-mean, bst-L-var, dst-L-mean, dst-L-var.
        #[arg(long)]
        family: String,
        /// Comma-separated n values, each at least 2.
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<u64>,
    },
    /// Seeded Monte Carlo simulation.
    Simulate {
        #[command(subcommand)]
        cmd: SimCmd,
    },
    /// Cross-oracle verification gate (exit 1 on any mismatch).
    Verify {
        /// Enumerations up to n = 4 only (seconds).
        #[arg(long, conflicts_with = "full")]
        fast: bool,
        /// Adds the n = 5 finite-key unsuccessful sweep (minutes).
        #[arg(long)]
        full: bool,
    },
}

#[derive(Subcommand)]
enum BstCmd {
    /// Probability generating function as a coefficient vector.
    Pgf {
        #[arg(long, value_enum)]
        search: SearchArg,
        #[arg(long)]
        n: u64,
    },
    /// Exact mean, second factorial moment and variance.
    Moments {
        #[arg(long, value_enum)]
        search: SearchArg,
        #[arg(long)]
        n: u64,
    },
}

#[derive(Subcommand)]
enum DstCmd {
    /// Probability generating function as a coefficient vector.
    Pgf {
        #[arg(long, value_enum)]
        search: SearchArg,
        #[arg(long, value_enum)]
        keys: KeysArg,
        #[arg(long)]
        n: u64,
    },
    /// Exact mean, second factorial moment and variance.
    Moments {
        #[arg(long, value_enum)]
        search: SearchArg,
        #[arg(long, value_enum)]
        keys: KeysArg,
        #[arg(long)]
        n: u64,
    },
    /// Exact distribution by sweeping every configuration (n <= 5;
    /// finite-key unsuccessful search at n = 5 takes minutes).
    Enumerate {
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum)]
        search: SearchArg,
        #[arg(long, value_enum)]
        keys: KeysArg,
        /// Also re-run at key width n+1 and report agreement (n <= 4).
        #[arg(long)]
        check_width: bool,
    },
}

#[derive(Subcommand)]
enum SimCmd {
    /// Binary search tree costs.
    Bst(SimArgs),
    /// Digital search tree costs.
    Dst(SimDstArgs),
    /// Costs of two distinct successful searches in one digital tree.
    Covariance {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Digits for the reference limit constant in the report.
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum)]
    search: SearchArg,
}

#[derive(Args)]
struct SimDstArgs {
    #[command(flatten)]
    base: SimArgs,
    #[arg(long, value_enum)]
    keys: KeysArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Unsuccessful,
    Successful,
    #[value(name = "pathlength")]
    PathLength,
}

impl From<SearchArg> for SearchKind {
    fn from(s: SearchArg) -> SearchKind {
        match s {
            SearchArg::Unsuccessful => SearchKind::Unsuccessful,
            SearchArg::Successful => SearchKind::Successful,
            SearchArg::PathLength => SearchKind::PathLength,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KeysArg {
    Infinite,
    Finite,
}

impl From<KeysArg> for KeyModel {
    fn from(k: KeysArg) -> KeyModel {
        match k {
            KeysArg::Infinite => KeyModel::Infinite,
            KeysArg::Finite => KeyModel::Finite,
        }
    }
}

/// A usage problem detected after parsing; printed to stderr, exit 2.
struct Usage(String);

fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        // Ignore failure: the pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let started = Instant::now();
    let (command, params, payload, exit) = match dispatch(&cli.command) {
        Ok(out) => out,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let envelope = json!({
        "command": command,
        "params": params,
        "payload": payload,
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_ms": started.elapsed().as_millis() as u64,
    });
    let rendered = match cli.format {
        Format::Json => serde_json::to_string_pretty(&envelope).unwrap() + "\n",
        Format::Table => render_table(&envelope),
    };
    match write_stdout(&rendered) {
        Ok(()) => ExitCode::from(exit),
        // The consumer hung up (e.g. piped into `head`); not our error,
        // and the computed exit code still stands.
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::from(exit),
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_stdout(text: &str) -> io::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()
}

type Out = (String, Value, Value, u8);

fn dispatch(cmd: &Cmd) -> Result<Out, Usage> {
    match cmd {
        Cmd::Bst { cmd } => bst_cmd(cmd),
        Cmd::Dst { cmd } => dst_cmd(cmd),
        Cmd::Cumulants {
            max_order,
            precision,
        } => cumulants_cmd(*max_order, *precision),
        Cmd::Constants { precision } => constants_cmd(*precision),
        Cmd::Asymptotics { family, grid } => asymptotics_cmd(family, grid),
        Cmd::Simulate { cmd } => simulate_cmd(cmd),
        Cmd::Verify { fast, full } => verify_cmd(*fast, *full),
    }
}

fn check_n(n: u64, max: u64, what: &str) -> Result<(), Usage> {
    if n < 1 || n > max {
        Err(usage(format!("--n must be in 1..={max} for {what}, got {n}")))
    } else {
        Ok(())
    }
}

/// Largest n served per exact route, chosen so the worst case stays
/// interactive on one core. Polynomial routes pay degree * coefficient
/// growth; harmonic-sum routes pay lcm(1..n) denominator growth.
mod caps {
    pub const BST_SEARCH_PGF: u64 = 256;
    pub const BST_SEARCH_MOMENTS: u64 = 32_768;
    pub const PATH_PGF: u64 = 32;
    pub const PATH_MOMENTS: u64 = 512;
    pub const DST_SEARCH_PGF: u64 = 128;
}

fn bst_cmd(cmd: &BstCmd) -> Result<Out, Usage> {
    match cmd {
        BstCmd::Pgf { search, n } => {
            let kind = SearchKind::from(*search);
            let pgf = match kind {
                SearchKind::Unsuccessful => {
                    check_n(*n, caps::BST_SEARCH_PGF, "exact search-cost polynomials")?;
                    bst::unsuccessful_pgf(*n)
                }
                SearchKind::Successful => {
                    check_n(*n, caps::BST_SEARCH_PGF, "exact search-cost polynomials")?;
                    bst::successful_pgf(*n)
                }
                SearchKind::PathLength => {
                    check_n(
                        *n,
                        caps::PATH_PGF,
                        "path-length polynomials (degree grows quadratically)",
                    )?;
                    bst::path_length_pgf(*n)
                }
            };
            Ok((
                "bst pgf".into(),
                json!({ "n": n, "search": kind.as_str() }),
                pgf_payload(*n, &pgf),
                0,
            ))
        }
        BstCmd::Moments { search, n } => {
            let kind = SearchKind::from(*search);
            let m = match kind {
                SearchKind::Unsuccessful => {
                    check_n(*n, caps::BST_SEARCH_MOMENTS, "exact search moments")?;
                    bst::unsuccessful_moments(*n)
                }
                SearchKind::Successful => {
                    check_n(*n, caps::BST_SEARCH_MOMENTS, "exact search moments")?;
                    bst::successful_moments(*n)
                }
                SearchKind::PathLength => {
                    check_n(
                        *n,
                        caps::PATH_MOMENTS,
                        "path-length moments (the variance recursion convolves all smaller sizes)",
                    )?;
                    bst::path_length_moments(*n)
                }
            };
            Ok((
                "bst moments".into(),
                json!({ "n": n, "search": kind.as_str() }),
                moments_payload(&m),
                0,
            ))
        }
    }
}

fn dst_cmd(cmd: &DstCmd) -> Result<Out, Usage> {
    match cmd {
        DstCmd::Pgf { search, keys, n } => {
            let kind = SearchKind::from(*search);
            let model = KeyModel::from(*keys);
            let pgf = dst_pgf(kind, model, *n)?;
            Ok((
                "dst pgf".into(),
                json!({ "n": n, "search": kind.as_str(), "keys": model.as_str() }),
                pgf_payload(*n, &pgf),
                0,
            ))
        }
        DstCmd::Moments { search, keys, n } => {
            let kind = SearchKind::from(*search);
            let model = KeyModel::from(*keys);
            let payload = if kind == SearchKind::PathLength && model == KeyModel::Infinite {
                check_n(*n, caps::PATH_MOMENTS, "infinite-key path-length moments")?;
                moments_payload(&dst::path_length_moments(*n))
            } else {
                let pgf = dst_pgf(kind, model, *n)?;
                json!({
                    "n": n,
                    "mean": pgf.mean().to_string(),
                    "second_factorial": pgf.derivative_at_one(2).to_string(),
                    "variance": pgf.variance().to_string(),
                })
            };
            Ok((
                "dst moments".into(),
                json!({ "n": n, "search": kind.as_str(), "keys": model.as_str() }),
                payload,
                0,
            ))
        }
        DstCmd::Enumerate {
            n,
            search,
            keys,
            check_width,
        } => {
            let kind = SearchKind::from(*search);
            let model = KeyModel::from(*keys);
            let result = enumeration::enumerate(*n, kind, model)
                .map_err(|e| usage(e.to_string()))?;
            let mut payload = serde_json::to_value(&result).unwrap();
            if *check_width {
                if model != KeyModel::Infinite {
                    return Err(usage(
                        "--check-width applies to infinite keys only (finite keys are n-bit by definition)",
                    ));
                }
                let stable = enumeration::width_stability_check(*n, kind)
                    .map_err(|e| usage(e.to_string()))?;
                payload
                    .as_object_mut()
                    .unwrap()
                    .insert("width_stable".into(), json!(stable));
            }
            Ok((
                "dst enumerate".into(),
                json!({
                    "n": n,
                    "search": kind.as_str(),
                    "keys": model.as_str(),
                    "check_width": check_width,
                }),
                payload,
                0,
            ))
        }
    }
}

/// PGFs servable per key model: infinite keys from the recursions (any
/// feasible n), finite keys from the n <= 5 reference tables, with the
/// n = 1 case enumerated on the spot.
fn dst_pgf(kind: SearchKind, model: KeyModel, n: u64) -> Result<Pgf, Usage> {
    match model {
        KeyModel::Infinite => Ok(match kind {
            SearchKind::Unsuccessful => {
                check_n(n, caps::DST_SEARCH_PGF, "exact search-cost polynomials")?;
                dst::unsuccessful_pgf_infinite(n)
            }
            SearchKind::Successful => {
                check_n(n, caps::DST_SEARCH_PGF, "exact search-cost polynomials")?;
                dst::successful_pgf_infinite(n)
            }
            SearchKind::PathLength => {
                check_n(
                    n,
                    caps::PATH_PGF,
                    "path-length polynomials (degree grows quadratically)",
                )?;
                dst::path_length_pgf(n)
            }
        }),
        KeyModel::Finite => {
            check_n(n, 5, "finite-key distributions (known only for n <= 5)")?;
            match dst::golden_pgf(kind, model, n) {
                Some(p) => Ok(p),
                None => Ok(enumeration::enumerate(n, kind, model)
                    .map_err(|e| usage(e.to_string()))?
                    .pgf),
            }
        }
    }
}

fn pgf_payload(n: u64, pgf: &Pgf) -> Value {
    json!({
        "n": n,
        "coefficients": serde_json::to_value(pgf).unwrap(),
        "mean": pgf.mean().to_string(),
        "variance": pgf.variance().to_string(),
    })
}

fn moments_payload(m: &treepgf_core::Moments) -> Value {
    json!({
        "n": m.n,
        "mean": m.mean.to_string(),
        "second_factorial": m.second_factorial.to_string(),
        "variance": m.variance.to_string(),
    })
}

fn check_precision(precision: u32) -> Result<RealCtx, Usage> {
    if (1..=30).contains(&precision) {
        Ok(RealCtx::with_digits(precision))
    } else {
        Err(usage(format!(
            "--precision must be in 1..=30 digits, got {precision}"
        )))
    }
}

fn cumulants_cmd(max_order: u32, precision: u32) -> Result<Out, Usage> {
    if !(2..=10).contains(&max_order) {
        return Err(usage(format!(
            "--max-order must be in 2..=10, got {max_order}"
        )));
    }
    let ctx = check_precision(precision)?;
    let c = cumulants::moment_constants(max_order as usize);
    let a = cumulants::cumulant_constants(max_order as usize);
    let mut kappa = Map::new();
    for s in 2..=max_order {
        let k = cumulants::kappa_leading_constant(&a[s as usize], s, ctx);
        kappa.insert(
            s.to_string(),
            json!(k.decimal(precision).map_err(usage_internal)?),
        );
    }
    let strings = |v: &[treepgf_core::Rational]| -> Value {
        Value::Object(
            v.iter()
                .enumerate()
                .skip(2)
                .map(|(s, x)| (s.to_string(), json!(x.to_string())))
                .collect(),
        )
    };
    Ok((
        "cumulants".into(),
        json!({ "max_order": max_order, "precision": precision }),
        json!({
            "c": strings(&c),
            "a": strings(&a),
            "kappa_leading": Value::Object(kappa),
            "precision": precision,
        }),
        0,
    ))
}

fn usage_internal(e: String) -> Usage {
    usage(format!("internal precision shortfall: {e}"))
}

fn constants_cmd(precision: u32) -> Result<Out, Usage> {
    let ctx = check_precision(precision)?;
    let entries: [(&str, treepgf_core::Real); 8] = [
        ("pi", ctx.pi()),
        ("ln2", ctx.ln2()),
        ("gamma", ctx.euler_gamma()),
        ("alpha", asymptotics::alpha(ctx)),
        ("beta", asymptotics::beta(ctx)),
        ("q", asymptotics::q_constant(ctx)),
        ("c", asymptotics::constant_c(ctx)),
        ("d", asymptotics::constant_d(ctx)),
    ];
    let mut values = Map::new();
    for (name, real) in entries {
        values.insert(
            name.to_string(),
            json!(real.decimal(precision).map_err(usage_internal)?),
        );
    }
    Ok((
        "constants".into(),
        json!({ "precision": precision }),
        json!({ "precision": precision, "values": Value::Object(values) }),
        0,
    ))
}

fn asymptotics_cmd(family: &str, grid: &[u64]) -> Result<Out, Usage> {
    let family = Family::from_str(family).map_err(usage)?;
    if grid.is_empty() {
        return Err(usage("--grid needs at least one n"));
    }
    if let Some(&bad) = grid.iter().find(|&&n| n < 2) {
        return Err(usage(format!("grid values must be at least 2, got {bad}")));
    }
    let max = match family {
        Family::BstPathLengthVar | Family::DstPathLengthMean | Family::DstPathLengthVar => {
            caps::PATH_MOMENTS
        }
        _ => caps::BST_SEARCH_MOMENTS,
    };
    if let Some(&bad) = grid.iter().find(|&&n| n > max) {
        return Err(usage(format!(
            "grid values for {} are capped at {max} (exact moments get expensive); got {bad}",
            family.as_str()
        )));
    }
    let ctx = RealCtx::with_digits(20);
    let report = asymptotics::convergence_report(ctx, family, grid);
    Ok((
        "asymptotics".into(),
        json!({ "family": family.as_str(), "grid": grid }),
        serde_json::to_value(&report).unwrap(),
        0,
    ))
}

fn simulate_cmd(cmd: &SimCmd) -> Result<Out, Usage> {
    match cmd {
        SimCmd::Bst(args) => {
            check_sim(args.n, args.trials, 1 << 20)?;
            let cfg = sim_config(args, KeysArg::Infinite);
            let summary = montecarlo::simulate_bst(&cfg);
            Ok((
                "simulate bst".into(),
                sim_params(args, None),
                serde_json::to_value(&summary).unwrap(),
                0,
            ))
        }
        SimCmd::Dst(args) => {
            let max = match KeyModel::from(args.keys) {
                KeyModel::Infinite => 1 << 16,
                KeyModel::Finite => 62,
            };
            check_sim(args.base.n, args.base.trials, max)?;
            let cfg = sim_config(&args.base, args.keys);
            let summary = montecarlo::simulate_dst(&cfg);
            Ok((
                "simulate dst".into(),
                sim_params(&args.base, Some(args.keys)),
                serde_json::to_value(&summary).unwrap(),
                0,
            ))
        }
        SimCmd::Covariance {
            n,
            trials,
            seed,
            precision,
        } => {
            if *n < 2 {
                return Err(usage("covariance needs --n at least 2"));
            }
            check_sim(*n, *trials, 1 << 16)?;
            let ctx = check_precision(*precision)?;
            let summary = montecarlo::simulate_dst_cost_covariance(*n, *trials, *seed)
                .map_err(|e| usage(e.to_string()))?;
            let mut payload = serde_json::to_value(&summary).unwrap();
            let d = asymptotics::constant_d(ctx);
            payload.as_object_mut().unwrap().insert(
                "d_reference".into(),
                json!({
                    "value": d.decimal(*precision).map_err(usage_internal)?,
                    "precision": precision,
                }),
            );
            Ok((
                "simulate covariance".into(),
                json!({ "n": n, "trials": trials, "seed": seed, "precision": precision }),
                payload,
                0,
            ))
        }
    }
}

fn check_sim(n: u64, trials: u64, max_n: u64) -> Result<(), Usage> {
    check_n(n, max_n, "simulation")?;
    if trials < 1 {
        return Err(usage("--trials must be at least 1"));
    }
    Ok(())
}

fn sim_config(args: &SimArgs, keys: KeysArg) -> SimConfig {
    SimConfig::new(args.n, SearchKind::from(args.search), KeyModel::from(keys))
        .trials(args.trials)
        .seed(args.seed)
}

fn sim_params(args: &SimArgs, keys: Option<KeysArg>) -> Value {
    let mut p = json!({
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "search": SearchKind::from(args.search).as_str(),
    });
    if let Some(k) = keys {
        p.as_object_mut()
            .unwrap()
            .insert("keys".into(), json!(KeyModel::from(k).as_str()));
    }
    p
}

fn verify_cmd(fast: bool, full: bool) -> Result<Out, Usage> {
    let tier = match (fast, full) {
        (true, _) => Tier::Fast,
        (_, true) => Tier::Full,
        _ => Tier::Default,
    };
    let report = verify::run(tier);
    let exit = if report.passed { 0 } else { 1 };
    Ok((
        "verify".into(),
        json!({ "tier": tier.as_str() }),
        serde_json::to_value(&report).unwrap(),
        exit,
    ))
}

/// Flat key = value rendering of the JSON envelope for human reading.
fn render_table(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, inner) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, inner, out);
                }
            }
            Value::Array(items) => {
                for (i, inner) in items.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), inner, out);
                }
            }
            other => out.push((prefix.to_string(), render(other))),
        }
    }
    fn render(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut rows = Vec::new();
    walk("", v, &mut rows);
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut text = String::new();
    for (k, val) in rows {
        text.push_str(&format!("{k:<width$}  {val}\n"));
    }
    text
}
