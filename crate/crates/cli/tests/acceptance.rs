//! Acceptance criteria: one PASS/FAIL line per criterion with its time budget.

use std::process::Command;
use std::time::{Duration, Instant};

use qpl_core::report::Report;
use qpl_core::suites;

type Check = fn() -> Result<Vec<Report>, String>;

fn reports(r: qpl_core::Result<Vec<Report>>) -> Result<Vec<Report>, String> {
    r.map_err(|e| e.to_string())
}

fn ring() -> Result<Vec<Report>, String> {
    Ok(suites::ring_suite(1000, 0x5eed))
}

fn p_formulas() -> Result<Vec<Report>, String> {
    suites::printed_formulas().map(|r| vec![r]).map_err(|e| e.to_string())
}

fn operators() -> Result<Vec<Report>, String> {
    reports(suites::operators_suite(6, 2))
}

fn asymptotics() -> Result<Vec<Report>, String> {
    reports(suites::asymptotics_suite(4, 6, 2))
}

fn genus0_oracle() -> Result<Vec<Report>, String> {
    reports(suites::oracle_suite())
}

fn vanishing() -> Result<Vec<Report>, String> {
    reports(suites::vanishing_suite())
}

fn lambda() -> Result<Vec<Report>, String> {
    reports(suites::lambda_suite())
}

fn qpl(threads: usize, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qpl"))
        .env_remove("QPL_CACHE_DIR")
        .args(["--json", "--threads", &threads.to_string(), "invariant"])
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn determinism() -> Result<Vec<Report>, String> {
    let jobs: [&[&str]; 3] = [
        &["--n", "2", "--genus", "1", "--insertions", "0:11", "--cap", "4"],
        &["--n", "2", "--genus", "0", "--insertions", "0:11;0:11;0:11", "--cap", "2"],
        &["--n", "2", "--genus", "1", "--insertions", "1:11", "--cap", "2", "--mode", "lambda"],
    ];
    let mut rep = Report::new("invariant output is byte-identical across runs and worker counts 1 and 8");
    for args in jobs {
        let runs = [qpl(1, args)?, qpl(1, args)?, qpl(8, args)?, qpl(8, args)?];
        rep.check(runs.iter().all(|r| r == &runs[0]), || format!("outputs differ for {}", args.join(" ")));
    }
    Ok(vec![rep])
}

fn main() {
    let criteria: [(&str, Duration, Check); 8] = [
        ("ring lemmas: exhaustive n<=3 with <=4 slots plus 1000 random", Duration::from_secs(10), ring),
        ("P-polynomials match the printed formulas", Duration::from_secs(60), p_formulas),
        ("operators through cap 6, n<=2", Duration::from_secs(120), operators),
        ("asymptotics: unitarity, structure and type of R through cap 4, K=6", Duration::from_secs(120), asymptotics),
        ("genus 0 against associativity counts; one convention passes", Duration::from_secs(300), genus0_oracle),
        ("vanishing of the three instances, total and per graph", Duration::from_secs(900), vanishing),
        ("lambda-independence of vdim-zero coefficients", Duration::from_secs(300), lambda),
        ("determinism of invariant output", Duration::from_secs(300), determinism),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = check();
        let elapsed = t.elapsed();
        let (ok, why) = match &result {
            Ok(rs) => {
                let bad: Vec<String> = rs.iter().filter(|r| !r.passed).map(|r| format!("{}: {}", r.claim, r.details.join("; "))).collect();
                (bad.is_empty(), bad.join(" | "))
            }
            Err(e) => (false, e.clone()),
        };
        let in_time = elapsed <= *budget;
        let pass = ok && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name} ({:.2}s, budget {}s){}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if !ok { format!(": {why}") } else if !in_time { ": over budget".into() } else { String::new() }
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
