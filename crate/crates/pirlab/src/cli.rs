//! Command-line front end. `run` takes the arguments and environment
//! explicitly and returns the exit code, so tests can drive it in-process.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pirlab_core::combiner::{self, InterferenceStructure};
use pirlab_core::field::is_prime;
use pirlab_core::scheme::{registry_build, Construction, ErrorModel, Overrides, SchemeId, SchemeInstance};
use pirlab_core::verify;
use pirlab_core::{Error, FieldPrime};

use crate::report;
use crate::runner;
use crate::tables::{self, TableKind};
use crate::transcript::{save_transcript, Transcript};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DECODE: i32 = 2;
pub const EXIT_SEARCH: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Largest failure rate accepted for schemes with vanishing error.
pub const EPSILON_ERROR_RATE: f64 = 0.01;
pub const DEFAULT_ALPHA: f64 = 0.001;
pub const DEFAULT_SAMPLES: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(name = "pirlab", version, about = "Private retrieval from coded, colluding-server storage: runs and checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One retrieval session; prints rate, download and decode status.
    Run(RunArgs),
    /// Correctness, privacy and dimension checks as a JSON report.
    Verify(VerifyArgs),
    /// Searches a combiner set or a spreading matrix and certifies it.
    Search(SearchArgs),
    /// Exact capacity values and outer bounds as CSV.
    Capacity(CapacityArgs),
    /// Desired-query rank, overhead and overlap quantities.
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Prime override.
    #[arg(long)]
    p: Option<u32>,
    /// Base seed (falls back to PIRLAB_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    scheme: String,
    /// Desired message, 1-based.
    #[arg(long, default_value_t = 1)]
    theta: usize,
    #[command(flatten)]
    common: Common,
    /// Transcript path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Correctness,
    Privacy,
    Dimensions,
    All,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    scheme: String,
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    /// Sessions (table schemes: random message pairs per table row and index).
    #[arg(long)]
    trials: Option<u64>,
    #[command(flatten)]
    common: Common,
    /// Prime for the privacy suite (defaults to a small verification prime).
    #[arg(long)]
    privacy_p: Option<u32>,
    /// Single collusion set, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    collude: Option<Vec<usize>>,
    /// Samples per desired index for statistical privacy.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    /// Require exact enumeration for privacy.
    #[arg(long)]
    exhaustive: bool,
    /// Draws for the dimension suite.
    #[arg(long, default_value_t = 100)]
    repeats: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Report path (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SearchKind {
    Combiner,
    Pmatrix,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[arg(long, value_enum)]
    kind: SearchKind,
    /// Scheme whose combiner is searched.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = pirlab_core::scheme::DEFAULT_SEARCH_TRIES)]
    tries: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    /// pir, tpir, mds-pir, fghk, theorem3, bound2422, general, table-four-cases
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 4)]
    n: u32,
    #[arg(long, default_value_t = 2)]
    t: u32,
    #[arg(long, default_value_t = 2)]
    kc: u32,
    /// Emit K = 1..=kmax instead of a single K.
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AuditArgs {
    scheme: String,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure with its exit code.
struct Exit(i32, String);

impl Exit {
    fn usage(msg: impl Into<String>) -> Self {
        Exit(EXIT_USAGE, msg.into())
    }
}

fn core_err(e: Error) -> Exit {
    match e {
        Error::UnknownScheme(_) | Error::NotPrime(_) => Exit(EXIT_USAGE, e.to_string()),
        Error::SearchExhausted { .. } => Exit(EXIT_SEARCH, e.to_string()),
        Error::DecodeFailure(_) => Exit(EXIT_DECODE, e.to_string()),
        _ => Exit(EXIT_FAIL, e.to_string()),
    }
}

struct Ctx<'a> {
    env_seed: Option<String>,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn seed(&self, c: &Common) -> Result<u64, Exit> {
        if let Some(s) = c.seed {
            return Ok(s);
        }
        match &self.env_seed {
            Some(v) => v.trim().parse().map_err(|_| Exit::usage(format!("PIRLAB_SEED={v} is not a 64-bit integer"))),
            None => Ok(0),
        }
    }

    fn say(&mut self, line: &str) {
        let _ = writeln!(self.stdout, "{line}");
    }

    /// Writes `text` to `out`, or to stdout.
    fn emit(&mut self, out: Option<&Path>, text: &str) -> Result<(), Exit> {
        match out {
            Some(p) => std::fs::write(p, text).map_err(|e| Exit(EXIT_FAIL, format!("{}: {e}", p.display()))),
            None => {
                let _ = self.stdout.write_all(text.as_bytes());
                Ok(())
            }
        }
    }

    fn emit_json(&mut self, out: Option<&Path>, v: &Value) -> Result<(), Exit> {
        let mut s = serde_json::to_string_pretty(v).expect("json");
        s.push('\n');
        self.emit(out, &s)
    }
}

/// Entry point: returns the process exit code.
pub fn run(args: &[String], env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            if code == EXIT_OK {
                let _ = write!(stdout, "{e}");
            } else {
                let _ = write!(stderr, "{e}");
            }
            return code;
        }
    };
    let mut ctx = Ctx { env_seed, stdout };
    let res = match cli.command {
        Command::Run(a) => cmd_run(&mut ctx, a),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::Search(a) => cmd_search(&mut ctx, a),
        Command::Capacity(a) => cmd_capacity(&mut ctx, a),
        Command::Audit(a) => cmd_audit(&mut ctx, a),
    };
    match res {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            code
        }
    }
}

fn parse_scheme(s: &str) -> Result<SchemeId, Exit> {
    SchemeId::parse(s).map_err(|e| Exit::usage(e.to_string()))
}

fn check_prime(p: Option<u32>) -> Result<(), Exit> {
    match p {
        Some(p) if !is_prime(p) || p >= 1 << 31 => Err(Exit::usage(format!("{p} is not a prime below 2^31"))),
        _ => Ok(()),
    }
}

fn build(id: SchemeId, o: &Overrides) -> Result<SchemeInstance, Exit> {
    registry_build(id, o).map_err(core_err)
}

fn cmd_run(ctx: &mut Ctx, a: RunArgs) -> Result<i32, Exit> {
    let id = parse_scheme(&a.scheme)?;
    check_prime(a.common.p)?;
    let seed = ctx.seed(&a.common)?;
    let o = Overrides { prime: a.common.p, ..Default::default() };
    let s = build(id, &o)?;
    if a.theta == 0 || a.theta > s.params.k {
        return Err(Exit::usage(format!("--theta must be in 1..={}", s.params.k)));
    }
    let (messages, t) = pirlab_core::session::run_seeded(&s, a.theta - 1, seed).map_err(core_err)?;
    if let Some(out) = &a.out {
        save_transcript(&Transcript::from_session(&t), out).map_err(|e| Exit(EXIT_FAIL, e.to_string()))?;
    }
    let rate = &s.declared_rate;
    let status = match &t.decoded {
        Ok(d) if *d == messages[t.theta] => "ok".to_string(),
        Ok(_) => "wrong-output".to_string(),
        Err(e) => format!("decode-failure ({e})"),
    };
    ctx.say(&format!("rate={rate} download={} {status}", t.counts.download));
    Ok(if status == "ok" { EXIT_OK } else { EXIT_DECODE })
}

/// Smallest prime usable for sampled privacy checks of `id`.
pub fn verification_prime(id: SchemeId) -> Option<u32> {
    match id {
        SchemeId::Tab2322 | SchemeId::Tab2432 => None,
        SchemeId::ClassTgen { .. } => Some(5),
        SchemeId::ClassT2 { n } => (n.saturating_sub(1).max(3)..).find(|&q| is_prime(q)),
        _ => Some(3),
    }
}

fn cmd_verify(ctx: &mut Ctx, a: VerifyArgs) -> Result<i32, Exit> {
    let id = parse_scheme(&a.scheme)?;
    check_prime(a.common.p)?;
    check_prime(a.privacy_p)?;
    let seed = ctx.seed(&a.common)?;
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(Exit::usage("--alpha must be in (0, 1)"));
    }
    if a.trials == Some(0) {
        return Err(Exit::usage("--trials must be positive"));
    }
    let sets: Option<Vec<Vec<usize>>> = match &a.collude {
        Some(v) if v.is_empty() || v.contains(&0) => return Err(Exit::usage("--collude takes 1-based server indices")),
        Some(v) => Some(vec![v.iter().map(|n| n - 1).collect()]),
        None => None,
    };
    let wants = |s: Suite| a.suite == s || a.suite == Suite::All;
    let o = Overrides { prime: a.common.p, ..Default::default() };
    let mut results = Vec::new();
    let mut config = json!({
        "scheme": id.to_string(),
        "suite": format!("{:?}", a.suite).to_lowercase(),
        "seed": seed,
        "p": a.common.p,
    });

    if wants(Suite::Correctness) || wants(Suite::Dimensions) {
        let s = build(id, &o)?;
        config["p"] = json!(s.params.field.p());
        if wants(Suite::Correctness) {
            let zero_error = s.error_model == ErrorModel::ZeroError;
            let (rep, trials) = if matches!(s.construction, Construction::Table(_)) {
                let per = a.trials.unwrap_or(200);
                (verify::check_correctness_exhaustive(&s, per, seed).map_err(core_err)?, per)
            } else {
                let n = a.trials.unwrap_or(1000);
                (runner::with_jobs(a.jobs, || runner::correctness(&s, n, seed)).map_err(core_err)?, n)
            };
            config["trials"] = json!(trials);
            results.push(report::correctness(&rep, zero_error, EPSILON_ERROR_RATE));
        }
        if wants(Suite::Dimensions) {
            let rep = verify::check_dimensions(&s, a.repeats, seed).map_err(core_err)?;
            results.push(report::dimensions(&rep));
        }
    }

    if wants(Suite::Privacy) {
        let pp = a.privacy_p.or(verification_prime(id));
        let s = build(id, &Overrides::queries_only(pp))?;
        let sets = sets.unwrap_or_else(|| s.params.collusion_sets.clone());
        if sets.iter().flatten().any(|&n| n >= s.params.n) {
            return Err(Exit::usage(format!("--collude names a server beyond N={}", s.params.n)));
        }
        config["privacy_p"] = json!(s.params.field.p());
        let exact = verify::check_privacy_exhaustive_sets(&s, &sets);
        let rep = match exact {
            Ok(r) => r,
            Err(e @ Error::NotEnumerable) if a.exhaustive => return Err(core_err(e)),
            Err(Error::NotEnumerable) => {
                config["samples"] = json!(a.samples);
                config["alpha"] = json!(a.alpha);
                runner::with_jobs(a.jobs, || runner::privacy_statistical(&s, &sets, a.samples, seed, a.alpha))
                    .map_err(core_err)?
            }
            Err(e) => return Err(core_err(e)),
        };
        results.push(report::privacy(&rep));
    }

    let pass = results.iter().all(|r| r["pass"] == json!(true));
    let doc = json!({"command": "verify", "config": config, "results": results, "pass": pass});
    ctx.emit_json(a.out.as_deref(), &doc)?;
    if a.out.is_some() {
        let parts: Vec<String> = results
            .iter()
            .map(|r| format!("{}={}", r["check"].as_str().unwrap_or("?"), if r["pass"] == json!(true) { "pass" } else { "fail" }))
            .collect();
        ctx.say(&format!("verify {id} {}", parts.join(" ")));
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_search(ctx: &mut Ctx, a: SearchArgs) -> Result<i32, Exit> {
    if a.tries == 0 {
        return Err(Exit::usage("--tries must be positive"));
    }
    check_prime(a.common.p)?;
    let seed = ctx.seed(&a.common)?;
    let (config, artifact) = match a.kind {
        SearchKind::Combiner => {
            let id = parse_scheme(a.scheme.as_deref().ok_or_else(|| Exit::usage("--scheme is required"))?)?;
            let s = build(id, &Overrides::queries_only(a.common.p))?;
            let st = InterferenceStructure::for_scheme(&s).map_err(core_err)?;
            let set = combiner::search_combiner(&st, seed, a.tries).map_err(core_err)?;
            let rep = combiner::verify_combiner(&set, &st);
            (
                json!({"kind": "combiner", "scheme": id.to_string(), "p": s.params.field.p(), "seed": seed, "tries": a.tries}),
                report::combiner(&set, &rep),
            )
        }
        SearchKind::Pmatrix => {
            let (n, t) = match (a.n, a.t) {
                (Some(n), Some(t)) if t >= 2 && t < n => (n, t),
                _ => return Err(Exit::usage("--n and --t with 2 <= T < N are required")),
            };
            let p = a.common.p.unwrap_or(10007);
            let f = FieldPrime::new(p).map_err(core_err)?;
            let pm = combiner::build_p_matrix(n, t, f, seed, a.tries).map_err(core_err)?;
            (json!({"kind": "pmatrix", "n": n, "t": t, "p": p, "seed": seed, "tries": a.tries}), report::pmatrix(&pm))
        }
    };
    let pass = artifact["certificate"]["pass"] == json!(true);
    let doc = json!({"command": "search", "config": config, "results": [artifact], "pass": pass});
    ctx.emit_json(a.out.as_deref(), &doc)?;
    if let Some(p) = &a.out {
        ctx.say(&format!("search {:?} wrote {}", a.kind, p.display()).to_lowercase());
    }
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_capacity(ctx: &mut Ctx, a: CapacityArgs) -> Result<i32, Exit> {
    let kind = TableKind::parse(&a.kind).ok_or_else(|| Exit::usage(format!("unknown capacity kind `{}`", a.kind)))?;
    let ks: Vec<u32> = match a.kmax {
        Some(0) => return Err(Exit::usage("--kmax must be positive")),
        Some(m) => (1..=m).collect(),
        None => vec![a.k],
    };
    let rows = tables::build(kind, &ks, a.n, a.t, a.kc).map_err(|e| Exit::usage(e.to_string()))?;
    ctx.emit(a.out.as_deref(), &tables::to_csv(&rows))?;
    Ok(EXIT_OK)
}

fn cmd_audit(ctx: &mut Ctx, a: AuditArgs) -> Result<i32, Exit> {
    let id = parse_scheme(&a.scheme)?;
    check_prime(a.common.p)?;
    let seed = ctx.seed(&a.common)?;
    let s = build(id, &Overrides::queries_only(a.common.p))?;
    let (result, pass) = match verify::audit_linear(&s, seed) {
        Ok(r) => (report::audit(&r), r.inequality_holds != Some(false)),
        Err(e @ Error::AsymmetryDetected(_)) => (json!({"check": "audit", "asymmetry": e.to_string()}), false),
        Err(e) => return Err(core_err(e)),
    };
    let doc = json!({
        "command": "audit",
        "config": {"scheme": id.to_string(), "p": s.params.field.p(), "seed": seed},
        "results": [result],
        "pass": pass,
    });
    ctx.emit_json(a.out.as_deref(), &doc)?;
    Ok(if pass { EXIT_OK } else { EXIT_FAIL })
}
