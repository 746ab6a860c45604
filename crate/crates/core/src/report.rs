//! Scans over discriminant ranges, the reference-table check and the
//! analytic-constant check, with flat CSV/JSON output.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{all_contour_bounds, residue_constants};
use crate::arith::{is_fundamental_discriminant, is_valid_discriminant, kronecker};
use crate::bounds::{
    poisson_gaussian_sum_check, trivial_bound_constants, verdict, Method, VerdictOptions,
    VerdictReport,
};
use crate::characters::build_canonical;
use crate::error::{Error, Result};
use crate::lseries::{central_derivative_with, Kernel, StandardKernel, Truncation};
use crate::quad::QuadConfig;
use crate::special::{mellin_identity_check_with, KernelValue};

pub const CSV_HEADER: &str =
    "D,d,family,B,W,h,r_lower,c_upper,method,R,R_err,C,C_err,lambda_prime,l_prime,nonvanishing,rank_prediction,error";

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub d_min: u64,
    pub d_max: u64,
    pub twists: Vec<i64>,
    pub tolerance: f64,
    pub jobs: usize,
    /// Evaluate `R` and `C` on bound-chain rows too.
    pub evaluate_chain_rows: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            d_min: 7,
            d_max: 100,
            twists: vec![1],
            tolerance: crate::lseries::DEFAULT_TOLERANCE,
            jobs: 1,
            evaluate_chain_rows: true,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_min == 0 || self.d_min > self.d_max {
            return Err(Error::Domain(format!(
                "need 1 <= dmin <= dmax, got [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(Error::Domain(format!(
                "tolerance must lie in (0, 1e-4], got {}",
                self.tolerance
            )));
        }
        if self.jobs == 0 {
            return Err(Error::Domain("jobs must be positive".into()));
        }
        if self.twists.is_empty() {
            return Err(Error::Domain("twist set is empty".into()));
        }
        if let Some(&d) = self
            .twists
            .iter()
            .find(|&&d| d != 1 && !is_fundamental_discriminant(d))
        {
            return Err(Error::InvalidTwist(d));
        }
        Ok(())
    }
}

/// One flat report row, in CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    #[serde(rename = "D")]
    pub disc: u64,
    pub d: i64,
    pub family: i8,
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "W")]
    pub w: i8,
    pub h: Option<u64>,
    pub r_lower: Option<f64>,
    pub c_upper: Option<f64>,
    pub method: Option<Method>,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    #[serde(rename = "R_err")]
    pub r_err: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    #[serde(rename = "C_err")]
    pub c_err: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub l_prime: Option<f64>,
    pub nonvanishing: bool,
    pub rank_prediction: Option<u64>,
    pub error: Option<String>,
}

/// Round to 15 significant digits so every output format carries the same number.
pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses")
}

impl ScanRow {
    fn from_report(v: &VerdictReport) -> Self {
        let rec = v.computed.as_ref();
        let r15 = |x: f64| Some(round_sig15(x));
        ScanRow {
            disc: v.disc,
            d: v.d,
            family: v.family,
            b: v.b,
            w: v.root_number,
            h: Some(v.h),
            r_lower: v.r_lower.and_then(r15),
            c_upper: v.c_upper.and_then(r15),
            method: Some(v.method),
            r: rec.and_then(|e| r15(e.r.value)),
            r_err: rec.and_then(|e| r15(e.r.total_error())),
            c: rec.and_then(|e| r15(e.c.value)),
            c_err: rec.and_then(|e| r15(e.c.total_error())),
            lambda_prime: rec.and_then(|e| r15(e.lambda_prime)),
            l_prime: rec.and_then(|e| r15(e.l_prime)),
            nonvanishing: v.nonvanishing,
            rank_prediction: v.rank_prediction,
            error: None,
        }
    }

    fn failed(job: &Job, err: &Error) -> Self {
        ScanRow {
            disc: job.disc,
            d: job.d,
            family: job.family,
            b: job.b,
            w: -1,
            h: crate::arith::class_number(job.disc).ok(),
            r_lower: None,
            c_upper: None,
            method: None,
            r: None,
            r_err: None,
            c: None,
            c_err: None,
            lambda_prime: None,
            l_prime: None,
            nonvanishing: false,
            rank_prediction: None,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    disc: u64,
    d: i64,
    family: i8,
    b: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The `(D, d, family)` combinations with root number `-1`, in scan order.
fn plan(cfg: &ScanConfig) -> Vec<Job> {
    let mut twists = cfg.twists.clone();
    twists.sort_unstable_by_key(|&d| (d != 1, d.unsigned_abs(), d));
    twists.dedup();
    let mut jobs = Vec::new();
    for disc in cfg.d_min..=cfg.d_max {
        let Some(parity) = is_valid_discriminant(disc) else {
            continue;
        };
        for &d in &twists {
            if gcd(disc, d.unsigned_abs()) != 1 {
                continue;
            }
            let sign = d.signum() as i8;
            let (family, w) = if parity.is_even() {
                // W = family·sign(d), known for d = 1 and for D = 8
                if d != 1 && disc != 8 {
                    continue;
                }
                (-sign, -1)
            } else {
                let w = kronecker(2, disc as i64) * sign;
                (kronecker(2, disc as i64), w)
            };
            if w != -1 {
                continue;
            }
            let scale = if parity.is_even() { 2 } else { 1 };
            jobs.push(Job {
                disc,
                d,
                family,
                b: scale * disc * d.unsigned_abs(),
            });
        }
    }
    jobs
}

fn run_job(job: &Job, opts: &VerdictOptions) -> ScanRow {
    match verdict(job.disc, job.d, job.family, opts) {
        Ok(v) => ScanRow::from_report(&v),
        Err(e) => ScanRow::failed(job, &e),
    }
}

/// Run a scan on a pool of `cfg.jobs` threads; row order does not depend on it.
pub fn scan(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let opts = VerdictOptions {
        tolerance: cfg.tolerance,
        evaluate_chain_rows: cfg.evaluate_chain_rows,
    };
    let jobs = plan(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(pool.install(|| jobs.par_iter().map(|j| run_job(j, &opts)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn write_rows<W: Write>(rows: &[ScanRow], format: OutputFormat, out: W) -> std::io::Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)
        }
    }
}

/// Kernel scaled by `1 + rel`, for fault injection.
#[derive(Debug, Clone, Copy)]
pub struct PerturbedKernel {
    pub rel: f64,
}

impl Kernel for PerturbedKernel {
    fn eval(&self, x: f64) -> Result<KernelValue> {
        let k = StandardKernel.eval(x)?;
        Ok(KernelValue {
            value: k.value * (1.0 + self.rel),
            ..k
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl CheckLine {
    fn abs(name: &str, computed: f64, target: f64, tolerance: f64) -> Self {
        CheckLine {
            name: name.into(),
            computed,
            target,
            tolerance,
            passed: (computed - target).abs() <= tolerance,
            note: None,
        }
    }

    fn failed(name: &str, target: f64, err: &Error) -> Self {
        CheckLine {
            name: name.into(),
            computed: f64::NAN,
            target,
            tolerance: 0.0,
            passed: false,
            note: Some(err.to_string()),
        }
    }
}

/// Reference values for the `D = 8` and `D = 11` examples.
pub mod reference {
    pub const R_8: f64 = 1.825_823_578_751_47;
    pub const C_8: f64 = -0.285_965_308_727_40;
    pub const LP_8: f64 = 1.209_401_857_169_272;
    pub const R_11: f64 = 0.814_977_052_524_87;
    pub const C_11: f64 = -0.060_097_576_604_036_8;
    pub const LP_11: f64 = 0.862_372_296_690_396;
    /// `L'(1, E)` for the curves of conductor 256 and 121.
    pub const CURVE_8: f64 = 1.209_401_857_2;
    pub const CURVE_11: f64 = 0.862_372_296_7;
    pub const SERIES_TOL: f64 = 1e-10;
    pub const CURVE_TOL: f64 = 1e-9;
    /// Table truncations: `n² <= 50` for `R`, `n <= 50` for `C`.
    pub const R_TERMS: u64 = 7;
    pub const C_TERMS: u64 = 50;
}

/// Recompute the reference table through `kernel`.
pub fn verify_reference_table(kernel: &dyn Kernel) -> Vec<CheckLine> {
    use reference::*;
    let mut lines = Vec::new();
    for (disc, family, r_ref, c_ref, lp_ref, curve, tag) in [
        (8u64, -1i8, R_8, C_8, LP_8, CURVE_8, "D=8"),
        (11, -1, R_11, C_11, LP_11, CURVE_11, "D=11"),
    ] {
        let tw = match build_canonical(disc, family).and_then(|c| c.twist(1)) {
            Ok(tw) => tw,
            Err(e) => {
                lines.push(CheckLine::failed(&format!("{tag} character"), f64::NAN, &e));
                continue;
            }
        };
        match central_derivative_with(
            &tw,
            Truncation::Terms(R_TERMS),
            Truncation::Terms(C_TERMS),
            kernel,
        ) {
            Ok(rec) => {
                lines.push(CheckLine::abs(
                    &format!("{tag} R (n<=7)"),
                    rec.r.value,
                    r_ref,
                    SERIES_TOL,
                ));
                lines.push(CheckLine::abs(
                    &format!("{tag} C (n<=50)"),
                    rec.c.value,
                    c_ref,
                    SERIES_TOL,
                ));
                lines.push(CheckLine::abs(
                    &format!("{tag} L'"),
                    rec.l_prime,
                    lp_ref,
                    SERIES_TOL,
                ));
            }
            Err(e) => lines.push(CheckLine::failed(&format!("{tag} series"), r_ref, &e)),
        }
        let tol = Truncation::Tolerance(1e-14);
        match central_derivative_with(&tw, tol, tol, kernel) {
            Ok(rec) => lines.push(CheckLine::abs(
                &format!("{tag} L' vs curve"),
                rec.l_prime,
                curve,
                CURVE_TOL,
            )),
            Err(e) => lines.push(CheckLine::failed(&format!("{tag} L' vs curve"), curve, &e)),
        }
    }
    lines
}

/// Knobs for the analytic checks; the override exists for fault injection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalyticOptions {
    pub max_intervals: Option<usize>,
}

/// Residues, contour bounds, inner sum, Mellin and Gaussian-sum grids.
#[allow(clippy::approx_constant)]
pub fn run_analytic_checks(opts: &AnalyticOptions) -> Vec<CheckLine> {
    let mut contour_cfg = QuadConfig::with_rel_tol(1e-9);
    let mut mellin_cfg = QuadConfig::with_rel_tol(1e-12);
    if let Some(m) = opts.max_intervals {
        contour_cfg.max_intervals = m;
        mellin_cfg.max_intervals = m;
    }
    let mut lines = Vec::new();

    match residue_constants() {
        Ok((a, b)) => {
            lines.push(CheckLine::abs("residue at 1", a, 0.523_599, 1e-6));
            lines.push(CheckLine::abs("residue at 3/4", b, -0.845_767, 1e-5));
        }
        Err(e) => lines.push(CheckLine::failed("residues", 0.523_599, &e)),
    }

    match all_contour_bounds(&contour_cfg) {
        Ok(bounds) => {
            for b in bounds {
                lines.push(CheckLine {
                    name: format!("contour {}", b.segment.name()),
                    computed: b.computed_bound,
                    target: b.claimed_coefficient,
                    tolerance: 0.01 * b.claimed_coefficient,
                    passed: b.within_slack(),
                    note: Some(format!("quadrature error {:.3e}", b.quad_error)),
                });
            }
        }
        Err(e) => lines.push(CheckLine::failed("contour segments", f64::NAN, &e)),
    }

    let k = trivial_bound_constants();
    lines.push(CheckLine::abs(
        "inner sum (odd v)",
        k.inner_odd,
        0.20788,
        5e-5,
    ));

    let mut worst = 0.0f64;
    let mut mellin_err = None;
    for i in 0..10 {
        let s = 1.1 + 0.3 * i as f64;
        match mellin_identity_check_with(s, &mellin_cfg) {
            Ok(r) => worst = worst.max(r),
            Err(e) => {
                mellin_err = Some(e);
                break;
            }
        }
    }
    match mellin_err {
        Some(e) => lines.push(CheckLine::failed("Mellin residual (max)", 0.0, &e)),
        None => lines.push(CheckLine {
            name: "Mellin residual (max)".into(),
            computed: worst,
            target: 0.0,
            tolerance: 1e-8,
            passed: worst < 1e-8,
            note: None,
        }),
    }

    let mut ratio = 0.0f64;
    for i in 0..50 {
        let a = 10f64.powf(4.0 * i as f64 / 49.0);
        let (lhs, rhs) = poisson_gaussian_sum_check(a).expect("a >= 1");
        ratio = ratio.max(lhs / rhs);
    }
    lines.push(CheckLine {
        name: "Gaussian sum lhs/rhs (max)".into(),
        computed: ratio,
        target: 1.0,
        tolerance: 0.0,
        passed: ratio < 1.0,
        note: None,
    });
    lines
}

/// Fixed-width table for terminal output.
pub fn render_checks(lines: &[CheckLine]) -> String {
    let mut s = format!(
        "{:<28} {:>22} {:>22} {:>10}  {}\n",
        "check", "computed", "target", "tolerance", "status"
    );
    for l in lines {
        s.push_str(&format!(
            "{:<28} {:>22.15e} {:>22.15e} {:>10.1e}  {}{}\n",
            l.name,
            l.computed,
            l.target,
            l.tolerance,
            if l.passed { "PASS" } else { "FAIL" },
            l.note
                .as_deref()
                .map(|n| format!(" ({n})"))
                .unwrap_or_default()
        ));
    }
    s
}
