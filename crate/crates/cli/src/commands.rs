use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use kellner_core::analytic::{
    corollary3_check, lemma2_check, lemma4_report, lemma5_check, lemma6_check, lemma7_from,
    s2_report, s_decomposition, theorem1_report, BoundName, BoundReport, SDecomposition,
};
use kellner_core::kellner::{omega_plus_fast, upper_bound_holds, OmegaMethod, OmegaRecord};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{BoundsArgs, Cli, Command, Common, Format, MethodArg, Selection};
use crate::cache::Cache;
use crate::compute::{lower_counts, pi_sqrt, upper_counts, Evaluation};
use crate::error::CliError;
use crate::grid::{parse_grid, parse_range, sample_distinct};
use crate::output::{open_sink, sig12, write_reports, write_rows, Row};

pub const THREADS_ENV: &str = "KELLNER_THREADS";

/// Exhaustive ranges wider than this need `--stride` or `--random`.
pub const MAX_EXHAUSTIVE: u64 = 10_000_000;

/// Smallest n accepted by `table`.
pub const TABLE_MIN_N: u64 = 1000;

/// `--threads`, then `KELLNER_THREADS`, then the core count.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<usize, CliError> {
    let n = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(v)) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?,
        (None, None) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }
    Ok(n)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let env = std::env::var(THREADS_ENV).ok();
    let threads = resolve_threads(cli.common.threads, env.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    pool.install(|| dispatch(cli.command, &cli.common))
}

fn format_or(common: &Common, default: Format) -> Format {
    if common.json {
        Format::Json
    } else {
        common.format.unwrap_or(default)
    }
}

fn dispatch(command: Command, common: &Common) -> Result<(), CliError> {
    match command {
        Command::Omega { n, method } => cmd_omega(n, method, common),
        Command::Table {
            grid,
            method,
            terms,
        } => cmd_table(&grid, method, terms, common),
        Command::Verify(sel) => cmd_verify(&sel, common, None).map(|_| ()),
        Command::Scan { selection, cache } => {
            cmd_verify(&selection, common, Some(&cache)).map(|_| ())
        }
        Command::Bounds(args) => cmd_bounds(&args, common),
        Command::Decompose { n } => cmd_decompose(n, common),
    }
}

fn disagreement_message(n: u64, results: &[(OmegaMethod, u64)]) -> String {
    let parts: Vec<String> = results.iter().map(|(m, v)| format!("{m}={v}")).collect();
    format!("methods disagree at n = {n}: {}", parts.join(", "))
}

pub fn cmd_omega(n: u64, method: MethodArg, common: &Common) -> Result<(), CliError> {
    if n < 1 {
        return Err(CliError::Usage("n must be at least 1".into()));
    }
    let start = Instant::now();
    let results: Vec<(OmegaMethod, u64)> = method
        .methods()
        .iter()
        .map(|&m| (m, upper_counts(&[n], m)[0]))
        .collect();
    let minus = lower_counts(&[n])[0];
    let elapsed = start.elapsed();
    if results.iter().any(|&(_, v)| v != results[0].1) {
        return Err(CliError::Failure(disagreement_message(n, &results)));
    }
    let format = format_or(common, Format::Human);
    let mut row = Row::new(n, results[0].1, minus, method.label());
    if common.timing || format == Format::Human {
        row.elapsed_ms = Some(ms(elapsed));
    }
    let mut out = open_sink(common.output.as_deref())?;
    write_rows(&mut out, &[row], format)?;
    if method == MethodArg::All && format == Format::Human {
        writeln!(out, "agreement    digit-scan, identity-scan and fast agree")?;
    }
    out.flush()?;
    Ok(())
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

pub fn table_rows(ns: &[u64], method: MethodArg, terms: u32) -> Result<Vec<Row>, CliError> {
    if let Some(&n) = ns.iter().find(|&&n| n < TABLE_MIN_N) {
        return Err(CliError::Usage(format!(
            "table rows need n >= {TABLE_MIN_N}, got {n}"
        )));
    }
    let eval = Evaluation::run(ns.to_vec(), method);
    if let Some(i) = eval.first_disagreement() {
        let results: Vec<_> = eval.upper.iter().map(|(m, v)| (*m, v[i])).collect();
        return Err(CliError::Failure(disagreement_message(ns[i], &results)));
    }
    ns.iter()
        .enumerate()
        .map(|(i, &n)| {
            Row::new(n, eval.omega_plus(i), eval.lower[i], method.label()).with_series(terms)
        })
        .collect()
}

pub fn cmd_table(
    grid: &str,
    method: MethodArg,
    terms: u32,
    common: &Common,
) -> Result<(), CliError> {
    let ns = parse_grid(grid)?;
    let start = Instant::now();
    let mut rows = table_rows(&ns, method, terms)?;
    if common.timing {
        let per = ms(start.elapsed()) / rows.len() as f64;
        rows.iter_mut().for_each(|r| r.elapsed_ms = Some(per));
    }
    let mut out = open_sink(common.output.as_deref())?;
    write_rows(&mut out, &rows, format_or(common, Format::Csv))
}

/// The n values a selection denotes, ascending.
pub fn select(sel: &Selection) -> Result<Vec<u64>, CliError> {
    let spec = sel
        .spec
        .as_deref()
        .or(sel.range.as_deref())
        .ok_or_else(|| CliError::Usage("give a range `A..B` or a single n".into()))?;
    let (a, b) = parse_range(spec)?;
    if let Some(k) = sel.random {
        return sample_distinct(a, b, k, sel.seed);
    }
    let stride = sel.stride.unwrap_or(1);
    if stride == 0 {
        return Err(CliError::Usage("stride must be positive".into()));
    }
    if (b - a) / stride > MAX_EXHAUSTIVE {
        return Err(CliError::Usage(format!(
            "[{a}, {b}] has more than {MAX_EXHAUSTIVE} points; use --stride or --random"
        )));
    }
    Ok((a..=b).step_by(stride as usize).collect())
}

/// Outcome of a verification run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub checked: usize,
    /// n with `omega_minus = pi(sqrt n) > 0`.
    pub sharp: usize,
    pub first_sharp: Option<u64>,
    pub largest_sharp: Option<u64>,
}

/// Rows plus summary, or the first counterexample.
pub fn verify_ns(
    ns: Vec<u64>,
    method: MethodArg,
) -> Result<(Evaluation, Vec<Row>, VerifySummary), CliError> {
    let eval = Evaluation::run(ns, method);
    if let Some(i) = eval.first_disagreement() {
        let results: Vec<_> = eval.upper.iter().map(|(m, v)| (*m, v[i])).collect();
        return Err(CliError::Failure(disagreement_message(
            eval.ns[i], &results,
        )));
    }
    let pis = pi_sqrt(&eval.ns);
    let mut summary = VerifySummary {
        checked: eval.ns.len(),
        sharp: 0,
        first_sharp: None,
        largest_sharp: None,
    };
    let mut rows = Vec::with_capacity(eval.ns.len());
    for (i, &n) in eval.ns.iter().enumerate() {
        let (plus, minus) = (eval.omega_plus(i), eval.lower[i]);
        if !upper_bound_holds(n, plus) {
            return Err(CliError::Failure(format!(
                "upper bound fails at n = {n}: omega_plus = {plus}"
            )));
        }
        if minus > pis[i] {
            return Err(CliError::Failure(format!(
                "lower bound fails at n = {n}: omega_minus = {minus} > pi(sqrt n) = {}",
                pis[i]
            )));
        }
        if minus == pis[i] && minus > 0 {
            summary.sharp += 1;
            summary.first_sharp.get_or_insert(n);
            summary.largest_sharp = Some(n);
        }
        rows.push(Row::new(n, plus, minus, method.label()));
    }
    Ok((eval, rows, summary))
}

pub fn cmd_verify(
    sel: &Selection,
    common: &Common,
    cache: Option<&Path>,
) -> Result<VerifySummary, CliError> {
    let ns = select(sel)?;
    let (eval, mut rows, summary) = verify_ns(ns, sel.method)?;
    let per_n = eval.elapsed_per_n();
    if common.timing {
        rows.iter_mut().for_each(|r| r.elapsed_ms = Some(ms(per_n)));
    }
    let format = format_or(common, Format::Csv);
    let mut out = open_sink(common.output.as_deref())?;
    if format != Format::Human {
        write_rows(&mut out, &rows, format)?;
    }
    let mut text = format!(
        "verified {} values of n: methods agree, both bounds hold; lower bound attained at {} values",
        summary.checked, summary.sharp
    );
    if let (Some(a), Some(b)) = (summary.first_sharp, summary.largest_sharp) {
        text += &format!(" (smallest n = {a}, largest n = {b})");
    }
    if let Some(path) = cache {
        let mut cache = Cache::open(path)?;
        let elapsed = if common.timing { per_n } else { Duration::ZERO };
        let records: Vec<OmegaRecord> = eval
            .ns
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| {
                let minus = eval.lower[i];
                eval.upper.iter().map(move |(m, v)| OmegaRecord {
                    n,
                    omega_plus: v[i],
                    omega_minus: minus,
                    method: *m,
                    elapsed,
                })
            })
            .collect();
        let added = cache.append(&records)?;
        text += &format!("; cache: {added} new records, {} total", cache.len());
    }
    if format == Format::Human {
        writeln!(out, "{text}")?;
        out.flush()?;
    } else {
        eprintln!("{text}");
    }
    Ok(summary)
}

/// A lemma instance before evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instance {
    Lemma2 { x: f64, y: f64, z: f64, eps: f64 },
    Corollary3 { n: u64, alpha: f64 },
    Lemma4 { n: u64, m: u64, h: u64, use_g: bool },
    Lemma5 { x: f64, m: u64, m1: u64 },
    Lemma6 { t: f64, cutoff: f64 },
    Lemma7 { n: u64 },
    Theorem1 { n: u64 },
}

impl Instance {
    pub fn evaluate(self) -> Result<BoundReport, CliError> {
        Ok(match self {
            Self::Lemma2 { x, y, z, eps } => lemma2_check(x, y, z, eps)?,
            Self::Corollary3 { n, alpha } => corollary3_check(n, alpha)?,
            Self::Lemma4 { n, m, h, use_g } => lemma4_report(n, m, h, use_g)?,
            Self::Lemma5 { x, m, m1 } => lemma5_check(x, m, m1)?,
            Self::Lemma6 { t, cutoff } => lemma6_check(t, cutoff)?,
            Self::Lemma7 { n } => lemma7_from(&s_decomposition(n)?),
            Self::Theorem1 { n } => theorem1_report(n, omega_plus_fast(n))?,
        })
    }
}

/// Largest x drawn for random short-interval instances.
pub const LEMMA2_MAX_X: f64 = 1e6;
/// Largest M drawn for random exponential-sum instances.
pub const LEMMA5_MAX_M: u64 = 10_000;

/// `k` admissible instances, uniform in each coordinate over its admissible
/// interval. Only the two lemmas with explicit constants can be sampled.
pub fn random_instances(lemma: BoundName, k: usize, seed: u64) -> Result<Vec<Instance>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(match lemma {
            BoundName::Lemma2 => {
                let x = rng.gen_range(3.0..=LEMMA2_MAX_X);
                let eps = rng.gen_range(0.05..0.95);
                let y = rng.gen_range(f64::powf(x, eps)..x);
                let z = rng.gen_range(y..x);
                Instance::Lemma2 { x, y, z, eps }
            }
            BoundName::Lemma5 => {
                let m = rng.gen_range(2..=LEMMA5_MAX_M);
                // M <= x^(3/5)/5 with room for rounding.
                let x_min = (5.0 * m as f64).powf(5.0 / 3.0) * 1.001;
                let x = rng.gen_range(x_min..100.0 * x_min);
                let m1 = rng.gen_range(m + 1..=2 * m);
                Instance::Lemma5 { x, m, m1 }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "--random is available for lemma2 and lemma5 only, not {other}"
                )))
            }
        });
    }
    Ok(out)
}

fn need<T>(v: Option<T>, flag: &str, lemma: BoundName) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("{lemma} needs --{flag}")))
}

pub fn explicit_instances(a: &BoundsArgs) -> Result<Vec<Instance>, CliError> {
    let lemma = a.lemma;
    let n = || need(a.n, "n", lemma);
    Ok(match lemma {
        BoundName::Lemma2 => vec![Instance::Lemma2 {
            x: need(a.x, "x", lemma)?,
            y: need(a.y, "y", lemma)?,
            z: need(a.z, "z", lemma)?,
            eps: need(a.eps, "eps", lemma)?,
        }],
        BoundName::Corollary3 => vec![Instance::Corollary3 {
            n: n()?,
            alpha: need(a.alpha, "alpha", lemma)?,
        }],
        BoundName::Lemma4 => vec![Instance::Lemma4 {
            n: n()?,
            m: need(a.m, "m", lemma)?,
            h: a.h,
            use_g: a.use_g,
        }],
        BoundName::Lemma5 => {
            let m = need(a.m, "m", lemma)?;
            vec![Instance::Lemma5 {
                x: need(a.x, "x", lemma)?,
                m,
                m1: a.m1.unwrap_or(2 * m),
            }]
        }
        BoundName::Lemma6 => {
            let ts = if a.t.is_empty() {
                vec![100.0]
            } else {
                a.t.clone()
            };
            ts.into_iter()
                .map(|t| Instance::Lemma6 {
                    t,
                    cutoff: a.cutoff,
                })
                .collect()
        }
        BoundName::Lemma7 => vec![Instance::Lemma7 { n: n()? }],
        BoundName::Theorem1 => vec![Instance::Theorem1 { n: n()? }],
    })
}

/// Reports in instance order.
pub fn evaluate_all(instances: &[Instance]) -> Result<Vec<BoundReport>, CliError> {
    instances.par_iter().map(|i| i.evaluate()).collect()
}

pub fn cmd_bounds(a: &BoundsArgs, common: &Common) -> Result<(), CliError> {
    let instances = match a.random {
        Some(k) => random_instances(a.lemma, k, a.seed)?,
        None => explicit_instances(a)?,
    };
    let reports = evaluate_all(&instances)?;
    let mut out = open_sink(common.output.as_deref())?;
    write_reports(&mut out, &reports, format_or(common, Format::Csv))?;
    let failed = reports.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        return Err(CliError::Failure(format!(
            "{failed} of {} {} instances failed",
            reports.len(),
            a.lemma
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    #[serde(flatten)]
    pub parts: SDecomposition,
    pub residual: f64,
    pub lemma7: BoundReport,
    pub s2_bound: BoundReport,
}

pub fn decompose(n: u64) -> Result<Decomposition, CliError> {
    let parts = s_decomposition(n)?;
    let fast = omega_plus_fast(n);
    if parts.omega_plus() != fast {
        return Err(CliError::Failure(format!(
            "S1 + S2 = {} but the upper count is {fast} at n = {n}",
            parts.omega_plus()
        )));
    }
    Ok(Decomposition {
        residual: parts.residual(),
        lemma7: lemma7_from(&parts),
        s2_bound: s2_report(&parts)?,
        parts,
    })
}

pub fn cmd_decompose(n: u64, common: &Common) -> Result<(), CliError> {
    let d = decompose(n)?;
    let mut out = open_sink(common.output.as_deref())?;
    let p = &d.parts;
    match format_or(common, Format::Human) {
        Format::Json => {
            serde_json::to_writer(&mut out, &d)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "n",
                "cut",
                "S1",
                "S2",
                "S11",
                "S12",
                "residual",
                "lemma7_margin",
                "s2_margin",
            ])?;
            w.write_record([
                p.n.to_string(),
                sig12(p.cut),
                p.s1.to_string(),
                p.s2.to_string(),
                sig12(p.s11),
                sig12(p.s12),
                sig12(d.residual),
                sig12(d.lemma7.margin),
                sig12(d.s2_bound.margin),
            ])?;
            w.flush()?;
        }
        Format::Human => {
            writeln!(out, "n              {}", p.n)?;
            writeln!(out, "cut            {}", sig12(p.cut))?;
            writeln!(out, "S1             {}", p.s1)?;
            writeln!(out, "S2             {}", p.s2)?;
            writeln!(out, "S1 + S2        {}", p.omega_plus())?;
            writeln!(out, "S11            {}", sig12(p.s11))?;
            writeln!(out, "S12            {}", sig12(p.s12))?;
            writeln!(out, "residual       {}", sig12(d.residual))?;
            writeln!(out, "lemma7_margin  {}", sig12(d.lemma7.margin))?;
            writeln!(out, "s2_margin      {}", sig12(d.s2_bound.margin))?;
        }
    }
    out.flush()?;
    Ok(())
}
