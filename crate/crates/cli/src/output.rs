//! Record rows and their CSV, JSON-lines and human renderings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use kellner_core::analytic::BoundReport;
use kellner_core::special::{corollary_series, delta, main_term};
use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

pub const CSV_HEADER: [&str; 9] = [
    "n",
    "omega_plus",
    "omega_minus",
    "main_term",
    "ratio",
    "kappa_hat",
    "err_norm",
    "method",
    "elapsed_ms",
];

/// One output row. Quantities undefined at small n are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub n: u64,
    pub omega_plus: u64,
    pub omega_minus: u64,
    pub main_term: Option<f64>,
    pub ratio: Option<f64>,
    pub kappa_hat: f64,
    pub err_norm: Option<f64>,
    pub method: &'static str,
    pub elapsed_ms: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<f64>,
}

impl Row {
    pub fn new(n: u64, omega_plus: u64, omega_minus: u64, method: &'static str) -> Self {
        let nf = n as f64;
        let w = omega_plus as f64;
        let main = main_term(n).ok();
        let root = nf.sqrt();
        let scale = delta(root).ok().map(|d| root * d);
        Self {
            n,
            omega_plus,
            omega_minus,
            main_term: main,
            ratio: main.map(|m| w / m),
            kappa_hat: w * nf.ln() / root,
            err_norm: main.zip(scale).map(|(m, s)| (w - m).abs() / s),
            method,
            elapsed_ms: None,
            series: Vec::new(),
        }
    }

    /// Attach the first `terms` partial sums of the asymptotic series.
    pub fn with_series(mut self, terms: u32) -> Result<Self, CliError> {
        if terms > 0 {
            self.series = corollary_series(self.n, terms)?.partial_sums();
        }
        Ok(self)
    }

    fn csv_fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(sig12).unwrap_or_default();
        let mut out = vec![
            self.n.to_string(),
            self.omega_plus.to_string(),
            self.omega_minus.to_string(),
            opt(self.main_term),
            opt(self.ratio),
            sig12(self.kappa_hat),
            opt(self.err_norm),
            self.method.to_string(),
            opt(self.elapsed_ms),
        ];
        out.extend(self.series.iter().map(|&v| sig12(v)));
        out
    }
}

/// `v` with 12 significant digits, `%g` style.
pub fn sig12(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        format!("{m}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (DIGITS - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Stdout or a file, buffered.
pub fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_rows(out: &mut dyn Write, rows: &[Row], format: Format) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let terms = rows.iter().map(|r| r.series.len()).max().unwrap_or(0);
            let mut w = csv::Writer::from_writer(&mut *out);
            let mut header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
            header.extend((1..=terms).map(|k| format!("series_{k}")));
            w.write_record(&header)?;
            for r in rows {
                w.write_record(r.csv_fields())?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in rows {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
        }
        Format::Human => {
            for r in rows {
                writeln!(out, "n            {}", r.n)?;
                writeln!(out, "omega_plus   {}", r.omega_plus)?;
                writeln!(out, "omega_minus  {}", r.omega_minus)?;
                writeln!(out, "method       {}", r.method)?;
                if let Some(m) = r.main_term {
                    writeln!(out, "main_term    {}", sig12(m))?;
                }
                writeln!(out, "kappa_hat    {}", sig12(r.kappa_hat))?;
                if let Some(ms) = r.elapsed_ms {
                    writeln!(out, "elapsed_ms   {}", sig12(ms))?;
                }
                for (k, s) in r.series.iter().enumerate() {
                    writeln!(out, "series_{:<5} {}", k + 1, sig12(*s))?;
                }
                if rows.len() > 1 {
                    writeln!(out)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

const BOUND_HEADER: [&str; 6] = ["name", "lhs", "rhs", "margin", "verdict", "params"];

pub fn write_reports(
    out: &mut dyn Write,
    reports: &[BoundReport],
    format: Format,
) -> Result<(), CliError> {
    let params = |r: &BoundReport| {
        r.params
            .iter()
            .map(|(k, v)| format!("{k}={}", sig12(*v)))
            .collect::<Vec<_>>()
            .join(";")
    };
    let verdict = |r: &BoundReport| {
        serde_json::to_value(r.verdict).map(|v| v.as_str().unwrap_or("").to_string())
    };
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(BOUND_HEADER)?;
            for r in reports {
                w.write_record([
                    r.name.to_string(),
                    sig12(r.lhs),
                    sig12(r.rhs),
                    sig12(r.margin),
                    verdict(r)?,
                    params(r),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in reports {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
        }
        Format::Human => {
            for r in reports {
                writeln!(
                    out,
                    "{:<10} {:<11} lhs={} rhs={} margin={} [{}]",
                    r.name.as_str(),
                    verdict(r)?,
                    sig12(r.lhs),
                    sig12(r.rhs),
                    sig12(r.margin),
                    params(r)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
