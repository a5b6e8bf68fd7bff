//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

#[path = "../../core/tests/common/quadrature.rs"]
mod quadrature;

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use kellner_cli::args::MethodArg;
use kellner_cli::commands::{decompose, evaluate_all, random_instances, table_rows};
use kellner_cli::compute::{pi_sqrt, upper_counts, Evaluation};
use kellner_cli::grid::sample_distinct;
use kellner_core::analytic::{lemma6_check, BoundName, Verdict};
use kellner_core::kellner::{omega_plus_fast, upper_bound_holds, OmegaMethod};
use kellner_core::special::{delta, exp_integral_e1};

const SEED: u64 = 0;

// 1, 2
const EXHAUSTIVE_MAX: u64 = 100_000;
const RANDOM_COUNT: usize = 1000;
const RANDOM_MAX: u64 = 1_000_000_000;
const WITNESS_MAX: u64 = 10_000;
// 3
const FAST_N: u64 = 1_000_000_000_000;
const FAST_BUDGET: Duration = Duration::from_secs(10);
const CROSS_N: u64 = 1_000_000_000;
const CROSS_BUDGET: Duration = Duration::from_secs(60);
// 4
const E1_POINTS: usize = 1000;
const E1_LO: f64 = 1e-2;
const E1_HI: f64 = 600.0;
const E1_RTOL: f64 = 1e-10;
// 5
const TABLE_GRID: [u64; 5] = [10_000, 100_000, 1_000_000, 10_000_000, 100_000_000];
const KAPPA_RANGE: (f64, f64) = (1.0, 3.0);
const KAPPA_TARGET: f64 = 2.0;
const TABLE_CROSS_N: u64 = 1_000_000;
// 6
const LEMMA2_COUNT: usize = 1000;
const LEMMA5_COUNT: usize = 100;
// 7
const LEMMA6_T: [f64; 3] = [1e2, 1e3, 1e4];
const LEMMA6_CUTOFF: f64 = 1e8;
const LEMMA6_SLACK: f64 = 5.0;
// 8
const DECOMP_N: [u64; 2] = [10_000, 1_000_000];
const DECOMP_RTOL: f64 = 1e-6;
// 9
const THREADS: [&str; 2] = ["1", "8"];

type Check<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn sweep() -> Evaluation {
    let mut ns: Vec<u64> = (2..=EXHAUSTIVE_MAX).collect();
    ns.extend(sample_distinct(EXHAUSTIVE_MAX + 1, RANDOM_MAX, RANDOM_COUNT, SEED).unwrap());
    Evaluation::run(ns, MethodArg::All)
}

fn c1_identity(eval: &Evaluation) -> Outcome {
    let bad: Vec<u64> = (0..eval.ns.len())
        .filter(|&i| eval.upper.iter().any(|(_, v)| v[i] != eval.upper[0].1[i]))
        .map(|i| eval.ns[i])
        .collect();
    outcome(
        bad.is_empty() && eval.upper.len() == 3,
        format!(
            "{} values of n ({} exhaustive, {} random up to {RANDOM_MAX}), {} disagreements{}, {:.1} s",
            eval.ns.len(),
            EXHAUSTIVE_MAX - 1,
            RANDOM_COUNT,
            bad.len(),
            bad.first().map(|n| format!(" (first n = {n})")).unwrap_or_default(),
            eval.elapsed.as_secs_f64()
        ),
    )
}

fn c2_bounds(eval: &Evaluation) -> Outcome {
    let pis = pi_sqrt(&eval.ns);
    let mut upper_bad = 0;
    let mut lower_bad = 0;
    let mut witness = None;
    for (i, &n) in eval.ns.iter().enumerate() {
        let (plus, minus) = (eval.omega_plus(i), eval.lower[i]);
        upper_bad += usize::from(!upper_bound_holds(n, plus));
        lower_bad += usize::from(minus > pis[i]);
        if witness.is_none() && n <= WITNESS_MAX && minus == pis[i] && minus > 0 {
            witness = Some((n, minus));
        }
    }
    outcome(
        upper_bad == 0 && lower_bad == 0 && witness.is_some(),
        format!(
            "upper violations {upper_bad}, lower violations {lower_bad}, sharpness witness {}",
            witness.map_or("none".into(), |(n, w)| format!(
                "n = {n} (omega_minus = pi(sqrt n) = {w})"
            ))
        ),
    )
}

fn c3_fast() -> Outcome {
    let start = Instant::now();
    let big = omega_plus_fast(FAST_N);
    let fast_time = start.elapsed();
    let start = Instant::now();
    let scan = upper_counts(&[CROSS_N], OmegaMethod::IdentityScan)[0];
    let fast = omega_plus_fast(CROSS_N);
    let cross_time = start.elapsed();
    outcome(
        fast_time < FAST_BUDGET && cross_time < CROSS_BUDGET && scan == fast,
        format!(
            "fast({FAST_N}) = {big} in {:.3} s; at n = {CROSS_N} fast = {fast}, identity scan = {scan}, {:.1} s",
            fast_time.as_secs_f64(),
            cross_time.as_secs_f64()
        ),
    )
}

fn c4_e1() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_x = 0.0;
    let mut sandwich_bad = 0;
    for k in 0..E1_POINTS {
        let x = E1_LO * (E1_HI / E1_LO).powf(k as f64 / (E1_POINTS - 1) as f64);
        let got = exp_integral_e1(x).unwrap().value;
        let want = quadrature::e1(x);
        let rel = ((got - want) / want).abs();
        if rel > worst {
            worst = rel;
            worst_x = x;
        }
        let e = (-x).exp();
        sandwich_bad += usize::from(!(e / (x + 1.0) < got && got < e / x));
    }
    outcome(
        worst <= E1_RTOL && sandwich_bad == 0,
        format!("{E1_POINTS} points, max relative error {worst:.2e} at x = {worst_x:.4}, sandwich violations {sandwich_bad}"),
    )
}

fn c5_kappa() -> Outcome {
    let rows = table_rows(&TABLE_GRID, MethodArg::Fast, 0).unwrap();
    let kappas: Vec<f64> = rows.iter().map(|r| r.kappa_hat).collect();
    let in_range = kappas
        .iter()
        .all(|k| (KAPPA_RANGE.0..=KAPPA_RANGE.1).contains(k));
    let (first, last) = (kappas[0], *kappas.last().unwrap());
    let closer = (last - KAPPA_TARGET).abs() < (first - KAPPA_TARGET).abs();
    let i = TABLE_GRID.iter().position(|&n| n == TABLE_CROSS_N).unwrap();
    let scan = upper_counts(&[TABLE_CROSS_N], OmegaMethod::DigitScan)[0];
    let listed: Vec<String> = kappas.iter().map(|k| format!("{k:.4}")).collect();
    outcome(
        in_range && closer && scan == rows[i].omega_plus,
        format!(
            "kappa_hat = [{}]; |2 - k| {:.4} at 1e4 vs {:.4} at 1e8; full scan at {TABLE_CROSS_N} {}",
            listed.join(", "),
            (first - KAPPA_TARGET).abs(),
            (last - KAPPA_TARGET).abs(),
            if scan == rows[i].omega_plus { "agrees" } else { "DISAGREES" }
        ),
    )
}

fn c6_lemmas() -> Outcome {
    let run = |lemma, k| {
        let reports = evaluate_all(&random_instances(lemma, k, SEED).unwrap()).unwrap();
        let passed = reports
            .iter()
            .filter(|r| r.verdict == Verdict::Pass)
            .count();
        let min_margin = reports
            .iter()
            .map(|r| r.margin)
            .fold(f64::INFINITY, f64::min);
        (passed, min_margin)
    };
    let (p2, m2) = run(BoundName::Lemma2, LEMMA2_COUNT);
    let (p5, m5) = run(BoundName::Lemma5, LEMMA5_COUNT);
    outcome(
        p2 == LEMMA2_COUNT && p5 == LEMMA5_COUNT,
        format!("lemma2 {p2}/{LEMMA2_COUNT} pass (min margin {m2:.3}), lemma5 {p5}/{LEMMA5_COUNT} pass (min margin {m5:.1})"),
    )
}

fn c7_lemma6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for t in LEMMA6_T {
        let r = lemma6_check(t, LEMMA6_CUTOFF).unwrap();
        let allowed = LEMMA6_SLACK * delta(t).unwrap() / t;
        ok &= r.lhs <= allowed && r.verdict == Verdict::ReportOnly;
        parts.push(format!(
            "t={t:e}: miss {:.3e} <= {:.3e}, margin {:.4e}",
            r.lhs, allowed, r.margin
        ));
        println!("    archived {}", serde_json::to_string(&r).unwrap());
    }
    outcome(ok, parts.join("; "))
}

fn c8_decomposition() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in DECOMP_N {
        let d = decompose(n).unwrap();
        let scan = upper_counts(&[n], OmegaMethod::DigitScan)[0];
        let tol = DECOMP_RTOL * d.parts.s11.max(1.0);
        ok &= d.parts.omega_plus() == scan && d.residual <= tol;
        parts.push(format!(
            "n={n}: S1+S2 = {} (scan {scan}), residual {:.2e} <= {tol:.2e}, lemma7 margin {:.4e}, S2 margin {:.4}",
            d.parts.omega_plus(),
            d.residual,
            d.lemma7.margin,
            d.s2_bound.margin
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c9_determinism() -> Outcome {
    let runs: [&[&str]; 4] = [
        &["verify", "2..10^4"],
        &["table", "--grid", "1e4:1e7:x10", "--terms", "3"],
        &["bounds", "lemma2", "--random", "200"],
        &["decompose", "1e4", "--format", "csv"],
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for args in runs {
        let outs: Vec<_> = THREADS
            .iter()
            .map(|t| {
                Command::new(env!("CARGO_BIN_EXE_kellner"))
                    .args(args)
                    .args(["--threads", t])
                    .output()
                    .expect("binary runs")
            })
            .collect();
        let same = outs
            .iter()
            .all(|o| o.status.success() && o.stdout == outs[0].stdout && !o.stdout.is_empty());
        ok &= same;
        parts.push(format!(
            "`{}` {}",
            args.join(" "),
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    outcome(
        ok,
        format!(
            "threads {} vs {}: {}",
            THREADS[0],
            THREADS[1],
            parts.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    println!("acceptance criteria");
    let eval = sweep();
    let checks: [Check; 9] = [
        ("1 three-way agreement", Box::new(|| c1_identity(&eval))),
        ("2 upper/lower bounds", Box::new(|| c2_bounds(&eval))),
        ("3 fast path", Box::new(c3_fast)),
        ("4 E1 accuracy", Box::new(c4_e1)),
        ("5 kappa_hat trend", Box::new(c5_kappa)),
        ("6 hard lemma checks", Box::new(c6_lemmas)),
        ("7 prime tail vs E1", Box::new(c7_lemma6)),
        ("8 decomposition", Box::new(c8_decomposition)),
        ("9 determinism", Box::new(c9_determinism)),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "[{}] criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of 9 criteria passed in {:.1} s",
        9 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
