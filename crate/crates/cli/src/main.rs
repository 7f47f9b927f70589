//! qpl: localization engine for equivariant Gromov–Witten invariants of (P¹)ⁿ.
//!
//! Exit codes: 0 success, 1 a verified claim failed, 2 usage or validation
//! error, 3 internal error.

mod config;
mod invariant;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qpl_core::asymptotics::{assemble, FactorTable};
use qpl_core::cache::DiskCache;
use qpl_core::engine::{EdgeSign, Insertion};
use qpl_core::oracle::{compare_genus0, wdvv_counts};
use qpl_core::pipeline::{Job, MAX_CAP, MAX_GENUS, MAX_N};
use qpl_core::report::Report;
use qpl_core::suites::{run_suite, SUITES};
use qpl_core::target::{all_points, Lambda, ModeKind, Site};
use qpl_core::{QplError, Truncation};

use config::Config;
use invariant::{invariant_document, parse_mode, parse_sign, render_text};

#[derive(Parser, Debug)]
#[command(name = "qpl", version, about = "Exact localization for equivariant GW invariants of (P^1)^n")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cache directory (default: no cache).
    #[arg(long, global = true, env = "QPL_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// key=value defaults file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct JobArgs {
    /// Number of P^1 factors.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    genus: Option<u32>,
    /// Insertions "k:c1c2..;k:c1c2..", each tau_k(H^c).
    #[arg(long)]
    insertions: Option<String>,
    /// Total degree cap.
    #[arg(long)]
    cap: Option<u32>,
    /// Per-variable degree caps "a,b,..", overriding --cap.
    #[arg(long)]
    caps: Option<String>,
    /// numeric | lambda | symbolic
    #[arg(long)]
    mode: Option<String>,
    /// proof | definition
    #[arg(long)]
    edge_sign: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one generating series of invariants.
    Invariant(JobArgs),
    /// Run verification suites.
    Verify {
        /// ring, operators, asymptotics, moduli, poly, vanishing, oracle, lambda or all
        #[arg(default_value = "all")]
        suite: String,
    },
    /// Genus-0 associativity counts of P^1 x P^1 and the convention check.
    Oracle {
        /// Largest total degree a + b.
        #[arg(long, default_value_t = 4)]
        max_degree: u32,
    },
    /// Asymptotic local data (U and R-tilde) at every fixed point, with lambda kept.
    LocalData {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        cap: u32,
        /// Number of R-tilde terms beyond the constant one.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Inspect or clear the cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum CacheAction {
    List,
    Clear,
    Stats,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<QplError> for Failure {
    fn from(e: QplError) -> Self {
        match e {
            QplError::Precondition(_) | QplError::OutOfRange(_) | QplError::Unstable { .. } | QplError::FactorMismatch(..) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn pick<T: std::str::FromStr>(flag: Option<T>, cfg: &Config, key: &str) -> Result<Option<T>, Failure> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.parsed(key).map_err(usage),
    }
}

fn build_job(a: &JobArgs, cfg: &Config) -> Result<(Job, ModeKind), Failure> {
    let n: usize = pick(a.n, cfg, "n")?.ok_or_else(|| usage("--n is required"))?;
    if n == 0 || n > MAX_N {
        return Err(usage(format!("n = {n} out of range (1..={MAX_N})")));
    }
    let genus: u32 = pick(a.genus, cfg, "genus")?.unwrap_or(0);
    if genus > MAX_GENUS {
        return Err(usage(format!("genus {genus} out of range (0..={MAX_GENUS})")));
    }
    let ins_text: String = pick(a.insertions.clone(), cfg, "insertions")?.ok_or_else(|| usage("--insertions is required"))?;
    let insertions = Insertion::parse_list(&ins_text, n)?;
    let caps: Option<String> = pick(a.caps.clone(), cfg, "caps")?;
    let trunc = match caps {
        Some(text) => {
            let caps: Vec<u32> = text
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| usage(format!("bad --caps entry {x:?}"))))
                .collect::<Result<_, _>>()?;
            if caps.len() != n {
                return Err(usage(format!("--caps has {} entries, expected {n}", caps.len())));
            }
            if caps.iter().any(|&c| c > MAX_CAP) {
                return Err(usage(format!("degree cap above {MAX_CAP}")));
            }
            Truncation::per_variable(&caps)
        }
        None => {
            let cap: u32 = pick(a.cap, cfg, "cap")?.unwrap_or(2);
            if cap > MAX_CAP {
                return Err(usage(format!("cap {cap} out of range (0..={MAX_CAP})")));
            }
            Truncation::total(n, cap)
        }
    };
    let mode = parse_mode(&pick(a.mode.clone(), cfg, "mode")?.unwrap_or_else(|| "numeric".into()))?;
    let sign = match pick(a.edge_sign.clone(), cfg, "edge-sign")? {
        Some(s) => parse_sign(&s)?,
        None => EdgeSign::Proof,
    };
    let job = Job::new(n, genus, insertions, trunc, sign);
    job.validate()?;
    Ok((job, mode))
}

fn emit(json_out: bool, doc: &Value, text: String) {
    if json_out {
        println!("{}", serde_json::to_string_pretty(doc).expect("json"));
    } else {
        print!("{text}");
    }
}

fn report_json(r: &Report) -> Value {
    serde_json::to_value(r).expect("json")
}

fn report_text(r: &Report) -> String {
    let mut s = format!("[{}] {}\n", if r.passed { "PASS" } else { "FAIL" }, r.claim);
    for d in &r.details {
        s.push_str(&format!("    {d}\n"));
    }
    s
}

fn cmd_invariant(a: &JobArgs, cfg: &Config, cache: Option<&DiskCache>, json_out: bool) -> Outcome {
    let (job, mode) = build_job(a, cfg)?;
    let doc = invariant_document(&job, mode, cache)?;
    emit(json_out, &doc, render_text(&doc));
    Ok(true)
}

fn cmd_verify(suite: &str, json_out: bool) -> Outcome {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else if SUITES.contains(&suite) {
        vec![suite]
    } else {
        return Err(usage(format!("unknown suite {suite:?}; expected one of {} or all", SUITES.join(", "))));
    };
    let mut all_passed = true;
    let mut docs = Vec::new();
    for name in names {
        let t = Instant::now();
        let reports = run_suite(name)?;
        let secs = t.elapsed().as_secs_f64();
        let passed = reports.iter().all(|r| r.passed);
        all_passed &= passed;
        if json_out {
            docs.push(json!({"suite": name, "passed": passed, "seconds": secs, "reports": reports.iter().map(report_json).collect::<Vec<_>>()}));
        } else {
            println!("== {name}: {} ({secs:.2}s)", if passed { "PASS" } else { "FAIL" });
            for r in &reports {
                print!("{}", report_text(r));
            }
        }
    }
    if json_out {
        println!("{}", serde_json::to_string_pretty(&json!({"schema": 1, "passed": all_passed, "suites": docs})).expect("json"));
    }
    Ok(all_passed)
}

fn cmd_oracle(max_degree: u32, json_out: bool) -> Outcome {
    if max_degree > MAX_CAP {
        return Err(usage(format!("max degree {max_degree} out of range (0..={MAX_CAP})")));
    }
    let table = wdvv_counts(max_degree)?;
    let degrees: Vec<(u32, u32)> = [(1, 0), (1, 1), (2, 2)].into_iter().filter(|&(a, b)| a + b <= max_degree).collect();
    let verdict = compare_genus0(&table, &degrees)?;
    let selected = verdict.selected.map(EdgeSign::name);
    let doc = json!({
        "schema": 1,
        "counts": table.to_json(),
        "convention": selected,
        "report": report_json(&verdict.report),
        "per_sign": verdict.per_sign.iter().map(|(s, r)| json!({"edge_sign": s.name(), "report": report_json(r)})).collect::<Vec<_>>(),
    });
    let mut text = String::new();
    for a in 0..=max_degree {
        for b in 0..=max_degree - a {
            let v = table.get(a, b);
            if v != qpl_core::Rational::from_integer(0.into()) {
                text.push_str(&format!("N({a},{b}) = {}\n", qpl_core::scalar::rat_str(&v)));
            }
        }
    }
    for (_, r) in &verdict.per_sign {
        text.push_str(&report_text(r));
    }
    text.push_str(&report_text(&verdict.report));
    emit(json_out, &doc, text);
    Ok(verdict.report.passed)
}

fn cmd_local_data(n: usize, cap: u32, depth: usize, json_out: bool) -> Outcome {
    if n == 0 || n > MAX_N {
        return Err(usage(format!("n = {n} out of range (1..={MAX_N})")));
    }
    if cap > MAX_CAP {
        return Err(usage(format!("cap {cap} out of range (0..={MAX_CAP})")));
    }
    if depth > 2 * MAX_CAP as usize {
        return Err(usage(format!("depth {depth} too large")));
    }
    let trunc = Truncation::total(n, cap);
    let factors = FactorTable::new(cap, depth);
    let mode = Lambda { n };
    let mut points = Vec::new();
    let mut text = String::new();
    for p in all_points(n) {
        let data = assemble(&mode, &factors, &Site::at(p), &trunc, depth);
        let rt: Vec<Value> = data
            .rt
            .iter()
            .map(|(mask, ks)| json!({"mask": mask, "r": ks.iter().map(|s| s.to_json()).collect::<Vec<_>>()}))
            .collect();
        text.push_str(&format!("fixed point {p:?}\n  U = {}\n", data.u.to_json()));
        for (mask, ks) in &data.rt {
            for (k, s) in ks.iter().enumerate() {
                text.push_str(&format!("  R~[{mask:0w$b}]_{k} = {}\n", s.to_json(), w = n));
            }
        }
        points.push(json!({"signs": p.signs(), "u": data.u.to_json(), "rt": rt}));
    }
    let doc = json!({"schema": 1, "n": n, "cap": cap, "depth": depth, "points": points});
    emit(json_out, &doc, text);
    Ok(true)
}

fn cmd_cache(action: CacheAction, cache: Option<&DiskCache>, json_out: bool) -> Outcome {
    let cache = cache.ok_or_else(|| usage("cache commands need --cache-dir or QPL_CACHE_DIR"))?;
    match action {
        CacheAction::List => {
            let list = cache.list()?;
            let text: String = list.iter().map(|e| format!("{} {} {}B{}\n", e.file, e.module, e.bytes, if e.valid { "" } else { " INVALID" })).collect();
            emit(json_out, &json!({"schema": 1, "entries": list}), text);
        }
        CacheAction::Clear => {
            let removed = cache.clear()?;
            emit(json_out, &json!({"schema": 1, "removed": removed}), format!("removed {removed} entries\n"));
        }
        CacheAction::Stats => {
            let s = cache.stats()?;
            let text = format!("root {}\nentries {} (invalid {})\nbytes {}\n", s.root, s.entries, s.invalid, s.bytes);
            emit(json_out, &json!({"schema": 1, "stats": s}), text);
        }
    }
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(p) => Config::load(p).map_err(usage)?,
        None => Config::default(),
    };
    let threads: Option<usize> = pick(cli.threads, &cfg, "threads")?;
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| Failure::Internal(e.to_string()))?;
    }
    let cache_dir: Option<PathBuf> = match cli.cache_dir.clone() {
        Some(d) => Some(d),
        None => cfg.get("cache-dir").map(PathBuf::from),
    };
    let cache = cache_dir.map(DiskCache::open).transpose()?;
    let out = match &cli.command {
        Command::Invariant(a) => cmd_invariant(a, &cfg, cache.as_ref(), cli.json),
        Command::Verify { suite } => cmd_verify(suite, cli.json),
        Command::Oracle { max_degree } => cmd_oracle(*max_degree, cli.json),
        Command::LocalData { n, cap, depth } => cmd_local_data(*n, *cap, *depth, cli.json),
        Command::Cache { action } => cmd_cache(*action, cache.as_ref(), cli.json),
    };
    if let Some(c) = &cache {
        for w in c.take_warnings() {
            eprintln!("warning: {w}");
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
