//! Command-line front end.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rug::Rational;
use serde::Serialize;

use crate::asymptotics::{log_monic, outer_ratio_with, OscillatoryModel, Regime};
use crate::contour::{trace_gamma, TraceOptions};
use crate::error::{Error, Result};
use crate::harness::{
    compute_zeros, convergence_study, make_plan, r_hat, working_precision, write_summary_csv, Comparison,
    ComparisonOptions, ParameterPlan,
};
use crate::laguerre::{default_precision, parse_decimal, LaguerreSpec};
use crate::landscape::{make_context, BoundarySide, GFunction};
use crate::measure::{MeasureSpec, RLevel};

/// Environment variable overriding the default working precision.
pub const PRECISION_ENV: &str = "NEGLAG_PRECISION";

#[derive(Debug, Parser)]
#[command(
    name = "neglag",
    version,
    about = "Zeros of L_n^(alpha)(n z) for alpha = -n A_n and their limit objects"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Endpoints of the limit interval as JSON.
    Betas {
        #[arg(long = "A", allow_negative_numbers = true)]
        a: f64,
    },
    /// Level curve Re phi = r/2 as CSV.
    Contour {
        #[arg(long = "A", allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        /// Maximum step length (default: interval width / 400).
        #[arg(long)]
        step: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Zeros of L_n^(alpha)(n z) as CSV `re,im,residual`.
    Zeros {
        #[command(flatten)]
        poly: PolyArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Compare computed zeros with the limit support and measure (JSON).
    Verify {
        #[command(flatten)]
        poly: PolyArgs,
        /// Classification distance.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Report for delta in {0.05, 0.1, 0.2} side by side.
        #[arg(long)]
        delta_sweep: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Compare exact values with a leading-order formula (CSV).
    Asymp {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Comma separated points, e.g. `4,3+2i` (outer, nth-root) or `0.5,0.8`.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
        points: Option<String>,
        /// `m` equally spaced points over the admissible part of the interval
        /// (oscillatory only).
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Runs a parameter plan over several degrees: JSON reports plus a CSV summary.
    Study {
        #[arg(long = "A")]
        a: f64,
        /// Level `r >= 0`, or `inf`.
        #[arg(long)]
        r: String,
        /// Comma separated degrees.
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        /// Explicit decimal parameters, one per degree.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alphas: Vec<String>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// JSON output (stdout when absent).
        #[arg(long)]
        json: Option<PathBuf>,
        /// CSV summary output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    #[arg(long)]
    pub n: u32,
    /// Exact decimal string, e.g. `-31.999999`.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Working precision in bits.
    #[arg(long, env = PRECISION_ENV)]
    pub precision: Option<u32>,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Output {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Outer,
    Oscillatory,
    NthRoot,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Outer => Regime::Outer,
            RegimeArg::Oscillatory => Regime::Oscillatory,
            RegimeArg::NthRoot => Regime::NthRoot,
        }
    }
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::BranchCut(_) | Error::OnBoundary(_) | Error::Plan(_) | Error::Parse(_) => 2,
        Error::Closure { .. } | Error::StepCollapse { .. } => 3,
        Error::NonConvergence { .. } => 4,
        Error::AsymptoticDomain(_) => 5,
        Error::Quadrature { .. } | Error::Bracket(_) | Error::Io(_) => 1,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Betas { a } => cmd_betas(a, &mut io::stdout().lock()),
        Command::Contour { a, r, step, out } => cmd_contour(a, r, step, &mut out.open()?),
        Command::Zeros { poly, out } => cmd_zeros(&poly, &mut out.open()?),
        Command::Verify {
            poly,
            delta,
            delta_sweep,
            out,
        } => cmd_verify(&poly, delta, delta_sweep, &mut out.open()?),
        Command::Asymp {
            poly,
            regime,
            points,
            grid,
            out,
        } => cmd_asymp(&poly, regime.into(), points.as_deref(), grid, &mut out.open()?),
        Command::Study {
            a,
            r,
            n,
            alphas,
            delta,
            json,
            csv,
        } => {
            let r = parse_level(&r)?;
            let plan = if alphas.is_empty() {
                make_plan(a, r, &n)?
            } else {
                let refs: Vec<&str> = alphas.iter().map(String::as_str).collect();
                ParameterPlan::from_alphas(a, r, &n, &refs)?
            };
            let study = convergence_study(
                &plan,
                &ComparisonOptions {
                    classify_tol: delta,
                    precision_bits: None,
                },
            )?;
            for v in &study.violations {
                eprintln!("trend: {v}");
            }
            let mut w: Box<dyn Write> = match json {
                Some(p) => Box::new(BufWriter::new(File::create(p)?)),
                None => Box::new(io::stdout().lock()),
            };
            write_json(&study.reports, &mut w)?;
            if let Some(p) = csv {
                write_summary_csv(&study.reports, BufWriter::new(File::create(p)?))?;
            }
            Ok(())
        }
    }
}

fn write_json<T: Serialize, W: Write + ?Sized>(value: &T, w: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `r >= 0` or `inf`.
pub fn parse_level(s: &str) -> Result<RLevel> {
    match s.trim() {
        "inf" | "infinity" | "Inf" => Ok(RLevel::Infinite),
        t => {
            let r: f64 = t.parse().map_err(|_| Error::Parse(format!("bad level `{s}`")))?;
            if r.is_finite() && r >= 0.0 {
                Ok(RLevel::Finite(r))
            } else {
                Err(Error::Domain(format!("level r = {s} must be non-negative")))
            }
        }
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("bad complex number `{s}`"));
    let num = |x: &str| -> Result<f64> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => x.parse::<f64>().map_err(|_| bad()),
        }
    };
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) else {
        return Ok(Complex64::new(t.parse::<f64>().map_err(|_| bad())?, 0.0));
    };
    // the sign separating the parts is the last one not following an exponent marker
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(Complex64::new(
            body[..k].parse::<f64>().map_err(|_| bad())?,
            num(&body[k..])?,
        )),
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.17e}")
}

fn fmt_c(z: Complex64) -> String {
    if z.im.is_sign_negative() {
        format!("{:.17e}-{:.17e}i", z.re, -z.im)
    } else {
        format!("{:.17e}+{:.17e}i", z.re, z.im)
    }
}

#[derive(Serialize)]
struct Betas {
    #[serde(rename = "A")]
    a: f64,
    beta1: f64,
    beta2: f64,
}

pub fn cmd_betas<W: Write>(a: f64, w: &mut W) -> Result<()> {
    let ctx = make_context(a, default_precision(1))?;
    write_json(
        &Betas {
            a,
            beta1: ctx.beta1,
            beta2: ctx.beta2,
        },
        w,
    )
}

pub fn cmd_contour<W: Write + ?Sized>(a: f64, r: f64, step: Option<f64>, w: &mut W) -> Result<()> {
    let ctx = make_context(a, default_precision(1))?;
    if a.is_nan() || a >= 1.0 {
        return Err(Error::Domain("the level curves need A < 1".into()));
    }
    let mut opts = TraceOptions::for_context(&ctx);
    if let Some(s) = step {
        if s.is_nan() || s <= 0.0 {
            return Err(Error::Domain(format!("step {s} must be positive")));
        }
        opts = opts.with_max_step(s);
    }
    let gamma = trace_gamma(&ctx, r, &opts)?;
    gamma.write_csv(&mut *w)?;
    writeln!(w, "# winding={}", gamma.winding)?;
    if let Some(warn) = &gamma.warning {
        writeln!(w, "# warning={warn}")?;
    }
    w.flush()?;
    Ok(())
}

fn spec_of(poly: &PolyArgs) -> Result<(Rational, LaguerreSpec)> {
    let alpha = parse_decimal(&poly.alpha)?;
    let prec = poly.precision.unwrap_or_else(|| default_precision(poly.n));
    let spec = LaguerreSpec::new(poly.n, alpha.clone(), prec)?;
    spec.check_varying_regime()?;
    Ok((alpha, spec))
}

pub fn cmd_zeros<W: Write + ?Sized>(poly: &PolyArgs, w: &mut W) -> Result<()> {
    let (alpha, spec) = spec_of(poly)?;
    let n = poly.n;
    let ctx = make_context(spec.check_varying_regime()?, spec.precision_bits())?;
    let level = r_hat(n, &alpha).map_or(RLevel::Infinite, RLevel::Finite);
    let prec = poly.precision.unwrap_or_else(|| working_precision(n, &alpha));
    let zs = compute_zeros(n, &alpha, &ctx, level, prec)?;
    // imaginary parts below the convergence threshold are not significant
    let snap = |z: Complex64| {
        if z.im.abs() <= zs.threshold * z.norm().max(1.0) {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    };
    let mut rows: Vec<(Complex64, f64)> = zs
        .zeros_f64()
        .into_iter()
        .map(snap)
        .zip(zs.residuals.iter().copied())
        .collect();
    rows.extend((0..zs.origin_multiplicity).map(|_| (Complex64::new(0.0, 0.0), 0.0)));
    rows.sort_by(|(a, _), (b, _)| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out = csv::Writer::from_writer(&mut *w);
    out.write_record(["re", "im", "residual"])?;
    for (z, res) in rows {
        out.write_record([fmt_f(z.re), fmt_f(z.im), format!("{res:.3e}")])?;
    }
    out.flush()?;
    drop(out);
    w.flush()?;
    if !zs.suspect.is_empty() {
        eprintln!("warning: {} zero(s) failed certification", zs.suspect.len());
    }
    Ok(())
}

/// Classification distances used by `--delta-sweep`.
pub const DELTA_SWEEP: [f64; 3] = [0.05, 0.1, 0.2];

#[derive(Serialize)]
struct SweepEntry {
    delta: f64,
    report: crate::harness::ComparisonReport,
}

pub fn cmd_verify<W: Write + ?Sized>(poly: &PolyArgs, delta: f64, sweep: bool, w: &mut W) -> Result<()> {
    let (alpha, _) = spec_of(poly)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Domain(format!("delta {delta} must be positive")));
    }
    let opts = ComparisonOptions {
        classify_tol: delta,
        precision_bits: poly.precision,
    };
    let cmp = Comparison::compute(poly.n, &alpha, &opts)?;
    if sweep {
        let entries = DELTA_SWEEP
            .iter()
            .map(|&d| {
                Ok(SweepEntry {
                    delta: d,
                    report: cmp.report(d)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        write_json(&entries, w)
    } else {
        write_json(&cmp.report(delta)?, w)
    }
}

fn parse_points(points: &str) -> Result<Vec<Complex64>> {
    points
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_complex)
        .collect()
}

pub fn cmd_asymp<W: Write + ?Sized>(
    poly: &PolyArgs,
    regime: Regime,
    points: Option<&str>,
    grid: Option<usize>,
    w: &mut W,
) -> Result<()> {
    let (alpha, spec) = spec_of(poly)?;
    let n = poly.n;
    let mut out = csv::Writer::from_writer(&mut *w);
    out.write_record(["point", "exact", "predicted", "rel_error"])?;
    match regime {
        Regime::Oscillatory => {
            let model = OscillatoryModel::new(&spec)?;
            let xs: Vec<f64> = match (points, grid) {
                (Some(p), _) => parse_points(p)?
                    .into_iter()
                    .map(|z| {
                        if z.im != 0.0 {
                            Err(Error::AsymptoticDomain(format!("{z} is not real")))
                        } else {
                            Ok(z.re)
                        }
                    })
                    .collect::<Result<_>>()?,
                (None, Some(m)) if m >= 2 => {
                    let lo = model.ctx.beta1 + model.margin();
                    let hi = model.ctx.beta2 - model.margin();
                    (0..m).map(|k| lo + (hi - lo) * k as f64 / (m - 1) as f64).collect()
                }
                _ => return Err(Error::Parse("give --points or --grid (at least 2)".into())),
            };
            for x in xs {
                let (exact, pred, err) = model.compare(x)?;
                out.write_record([fmt_f(x), fmt_f(exact), fmt_f(pred), fmt_f(err)])?;
            }
        }
        Regime::Outer | Regime::NthRoot => {
            let zs = parse_points(points.ok_or_else(|| Error::Parse("--points is required".into()))?)?;
            let ctx = make_context(spec.check_varying_regime()?, spec.precision_bits())?;
            if regime == Regime::Outer {
                let gfun = GFunction::new(&ctx)?;
                for z in zs {
                    let pred = outer_ratio_with(&ctx, gfun.contour(), n, z)?.value;
                    let side = if z.im == 0.0 {
                        BoundarySide::Above
                    } else {
                        BoundarySide::OffAxis
                    };
                    let exact = (log_monic(&spec, z)? - n as f64 * gfun.eval(z, side)?).exp();
                    out.write_record([fmt_c(z), fmt_c(exact), fmt_c(pred), fmt_f((exact / pred - 1.0).norm())])?;
                }
            } else {
                let level = r_hat(n, &alpha).map_or(RLevel::Infinite, RLevel::Finite);
                let measure = MeasureSpec::new(ctx, level, None)?;
                for z in zs {
                    let exact = log_monic(&spec, z)?.re / n as f64;
                    let pred = measure.log_potential(z)?;
                    let err = (exact - pred).abs() / pred.abs().max(f64::MIN_POSITIVE);
                    out.write_record([fmt_c(z), fmt_f(exact), fmt_f(pred), fmt_f(err)])?;
                }
            }
        }
    }
    out.flush()?;
    drop(out);
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("4").unwrap(), Complex64::new(4.0, 0.0));
        assert_eq!(parse_complex("3+2i").unwrap(), Complex64::new(3.0, 2.0));
        assert_eq!(parse_complex("-1+2i").unwrap(), Complex64::new(-1.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2.5e2j").unwrap(), Complex64::new(1e-3, -250.0));
        assert_eq!(parse_complex(" 0.5 - 1e-1i ").unwrap(), Complex64::new(0.5, -0.1));
        assert!(parse_complex("x+i").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn levels() {
        assert_eq!(parse_level("inf").unwrap(), RLevel::Infinite);
        assert_eq!(parse_level("1.5").unwrap(), RLevel::Finite(1.5));
        assert!(matches!(parse_level("-1"), Err(Error::Domain(_))));
    }

    #[test]
    fn betas_json() {
        let mut buf = Vec::new();
        cmd_betas(0.75, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert!((v["beta1"].as_f64().unwrap() - 0.25).abs() < 1e-15);
        assert!((v["beta2"].as_f64().unwrap() - 2.25).abs() < 1e-15);
        assert_eq!(v["A"].as_f64().unwrap(), 0.75);
        assert_eq!(exit_code(&cmd_betas(1.5, &mut Vec::new()).unwrap_err()), 2);
    }

    #[test]
    fn small_zero_table() {
        let poly = PolyArgs {
            n: 2,
            alpha: "-1".into(),
            precision: None,
        };
        let mut buf = Vec::new();
        cmd_zeros(&poly, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert_eq!(text.lines().next(), Some("re,im,residual"));
        assert_eq!(rows.len(), 2);
        assert!(rows[0][0].abs() < 1e-30 && rows[0][1].abs() < 1e-30);
        assert!((rows[1][0] - 1.0).abs() < 1e-30 && rows[1][1].abs() < 1e-30);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Closure { steps: 1 }), 3);
        assert_eq!(
            exit_code(&Error::NonConvergence {
                iterations: 1,
                worst_residual: 1.0
            }),
            4
        );
        assert_eq!(exit_code(&Error::AsymptoticDomain(String::new())), 5);
        let poly = PolyArgs {
            n: 40,
            alpha: "-32.4".into(),
            precision: None,
        };
        let err = cmd_asymp(&poly, Regime::Oscillatory, Some("0.1"), None, &mut Vec::new()).unwrap_err();
        assert_eq!(exit_code(&err), 5);
    }
}
