//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hecke_core::analytic::{
    all_contour_bounds, reconstructed_lower_bound, residue_constants, Segment,
};
use hecke_core::arith::{is_valid_discriminant, kronecker};
use hecke_core::bounds::{
    multiplicative_monotonicity_check, poisson_gaussian_sum_check, r_lower_bound,
    trivial_bound_constants, verdict, Method, SignAssignment, VerdictOptions,
};
use hecke_core::characters::{build_canonical, HalfIntegerElement, TwistedCharacter};
use hecke_core::error::Error;
use hecke_core::lseries::{
    central_derivative, coefficient_a_n, liouville_comparison_sum, theta_sum_with, StandardKernel,
    Truncation,
};
use hecke_core::quad::QuadConfig;
use hecke_core::report::{
    scan, verify_reference_table, write_rows, OutputFormat, ScanConfig, ScanRow,
};
use hecke_core::special::{f_eval, mellin_identity_check};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let lines = verify_reference_table(&StandardKernel);
    let elapsed = start.elapsed();
    for l in &lines {
        ensure(l.passed, || {
            format!(
                "{}: {} vs {} (tol {:e})",
                l.name, l.computed, l.target, l.tolerance
            )
        })?;
    }
    ensure(lines.len() == 8, || {
        format!("expected 8 cells, got {}", lines.len())
    })?;
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("8 cells within tolerance in {elapsed:.2?}"))
}

fn full_scan(jobs: usize) -> Result<(Vec<ScanRow>, Duration), String> {
    let cfg = ScanConfig {
        d_min: 1,
        d_max: 10_000,
        jobs,
        ..ScanConfig::default()
    };
    let start = Instant::now();
    let rows = scan(&cfg).map_err(|e| e.to_string())?;
    Ok((rows, start.elapsed()))
}

fn criterion_2() -> Outcome {
    let (rows, t1) = full_scan(1)?;
    let (rows8, t8) = full_scan(8)?;
    ensure(rows == rows8, || {
        "parallel scan differs from serial scan".into()
    })?;
    ensure(t1 < Duration::from_secs(600), || {
        format!("serial scan took {t1:?}")
    })?;
    ensure(t8 < Duration::from_secs(120), || {
        format!("parallel scan took {t8:?}")
    })?;

    // every valid D with a root-number -1 family, independently enumerated
    let expected: Vec<u64> = (1..=10_000u64)
        .filter(|&d| match is_valid_discriminant(d) {
            Some(p) if p.is_even() => true,
            Some(_) => kronecker(2, d as i64) == -1,
            None => false,
        })
        .collect();
    let got: Vec<u64> = rows.iter().map(|r| r.disc).collect();
    ensure(got == expected, || {
        format!(
            "scan covered {} fields, expected {}",
            got.len(),
            expected.len()
        )
    })?;

    let mut chain = 0;
    for r in &rows {
        let tag = format!("D={}", r.disc);
        ensure(r.error.is_none(), || format!("{tag}: {:?}", r.error))?;
        ensure(r.nonvanishing && r.w == -1, || {
            format!("{tag} not certified")
        })?;
        let even = r.disc % 2 == 0;
        let in_chain = if even { r.disc >= 24 } else { r.disc >= 19 };
        let (lo, hi) = (r.r_lower.unwrap(), r.c_upper.unwrap());
        if in_chain {
            ensure(r.method == Some(Method::BoundChain) && lo > hi, || {
                format!("{tag}: chain failed")
            })?;
            chain += 1;
            if let (Some(rv), Some(cv)) = (r.r, r.c) {
                ensure(rv >= lo && cv.abs() <= hi, || {
                    format!("{tag}: bound chain unsound")
                })?;
            }
        } else {
            ensure(r.method == Some(Method::DirectTable), || {
                format!("{tag}: expected direct table")
            })?;
            ensure([8, 11].contains(&r.disc), || {
                format!("{tag}: unexpected direct row")
            })?;
        }
    }
    Ok(format!(
        "{} fields nonvanishing, {} by bound chain; serial {:.2?}, 8 jobs {:.2?}",
        rows.len(),
        chain,
        t1,
        t8
    ))
}

#[allow(clippy::approx_constant)]
fn criterion_3() -> Outcome {
    let (a, b) = residue_constants().map_err(|e| e.to_string())?;
    ensure((a - 0.523_599).abs() <= 1e-6, || {
        format!("first residue {a}")
    })?;
    ensure((b + 0.845_767).abs() <= 1e-5, || {
        format!("second residue {b}")
    })?;
    Ok(format!("{a:.10}, {b:.10}"))
}

fn criterion_4() -> Outcome {
    let bounds = all_contour_bounds(&QuadConfig::with_rel_tol(1e-9)).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for b in &bounds {
        ensure(b.within_slack(), || {
            format!(
                "{:?}: {:e} > {:e}",
                b.segment, b.computed_bound, b.claimed_coefficient
            )
        })?;
        parts.push(format!("{}={:.6e}", b.segment.name(), b.computed_bound));
    }
    let c1 = bounds.iter().find(|b| b.segment == Segment::C1).unwrap();
    let c5 = bounds.iter().find(|b| b.segment == Segment::C5).unwrap();
    ensure(
        (c1.computed_bound - c5.computed_bound).abs() <= 1e-12 * c1.computed_bound,
        || "C1 != C5".into(),
    )?;
    let inner = trivial_bound_constants().inner_odd;
    ensure((inner - 0.20788).abs() <= 5e-5, || {
        format!("inner sum {inner}")
    })?;
    parts.push(format!("inner={inner:.8}"));
    Ok(parts.join(" "))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
}

/// Full-lattice oracle: four symmetric copies of every `(u, v)` with `v != 0`.
fn oracle_a_n(tw: &TwistedCharacter, n: u64) -> i64 {
    let chi = &tw.base;
    let bound = 2 * (n as f64).sqrt() as i64 + 2;
    let mut total = 0i64;
    for u in -bound..=bound {
        for v in (-bound..=bound).filter(|&v| v != 0) {
            let (lhs, rhs, w) = if chi.is_even() {
                (u * u + 2 * v * v, n as i64, 2 * u)
            } else {
                (u * u + chi.disc() as i64 * v * v, 4 * n as i64, u)
            };
            if lhs == rhs {
                total += chi.epsilon(HalfIntegerElement::new(u, v)).unwrap() as i64 * w;
            }
        }
    }
    kronecker(tw.d, n as i64) as i64 * total / 4
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();

    // (a) positivity and the explicit lower bound
    let residues = residue_constants().map_err(|e| e.to_string())?;
    let segments =
        all_contour_bounds(&QuadConfig::with_rel_tol(1e-9)).map_err(|e| e.to_string())?;
    for x in log_grid(0.01, 1e5, 200) {
        let s = liouville_comparison_sum(x, 1e-13).map_err(|e| e.to_string())?;
        ensure(s.value > 0.0, || format!("(a) sum not positive at x={x}"))?;
        if x > 1.0 {
            let lo = r_lower_bound(x).unwrap();
            ensure(s.value + s.total_error() >= lo, || {
                format!("(a) sum {} < bound {lo} at x={x}", s.value)
            })?;
        }
        if x >= 2.0 {
            let rebuilt = reconstructed_lower_bound(x, residues, &segments);
            ensure(rebuilt >= r_lower_bound(x).unwrap(), || {
                format!("(a) constants not consistent at x={x}")
            })?;
        }
    }
    notes.push("a");

    // (b) first term dominates the rest for 0 < x < 20
    for x in log_grid(0.05, 19.9, 50) {
        let first = f_eval(2.0 * PI / x).unwrap().value;
        let rest = theta_sum_with(
            |n| (n >= 2) as i8,
            x,
            Truncation::Tolerance((first * 1e-6).max(f64::MIN_POSITIVE)),
            &StandardKernel,
        )
        .map_err(|e| e.to_string())?;
        ensure(first > rest.value + rest.total_error(), || {
            format!("(b) fails at x={x}")
        })?;
    }
    notes.push("b");

    // (c) random completely multiplicative functions
    let mut rng = ChaCha8Rng::seed_from_u64(0x005e_ed33);
    let primes: Vec<u64> = (2..100u64)
        .filter(|&p| (2..p).all(|q| p % q != 0))
        .collect();
    let lam = SignAssignment::liouville();
    for _ in 0..200 {
        let lower: Vec<(u64, i8)> = primes.iter().map(|&p| (p, rng.gen_range(-1..=1))).collect();
        let upper: Vec<(u64, i8)> = lower
            .iter()
            .map(|&(p, s)| (p, if rng.gen_bool(0.3) { 1 } else { s }))
            .collect();
        let m2 = SignAssignment::from_primes(lower).unwrap();
        let m1 = SignAssignment::from_primes(upper).unwrap();
        let x = 10f64.powf(rng.gen_range(-0.5..3.0));
        let s = theta_sum_with(
            |n| m1.value(n),
            x,
            Truncation::Tolerance(1e-14),
            &StandardKernel,
        )
        .map_err(|e| e.to_string())?;
        ensure(s.value > 0.0, || format!("(c) non-positive sum at x={x}"))?;
        ensure(
            multiplicative_monotonicity_check(&m1, &m2, x).unwrap(),
            || format!("(c) m1 < m2 at x={x}"),
        )?;
        ensure(
            multiplicative_monotonicity_check(&m2, &lam, x).unwrap(),
            || format!("(c) m2 < λ at x={x}"),
        )?;
    }
    notes.push("c");

    // (d) Gaussian sum
    for a in log_grid(1.0, 1e4, 50) {
        let (lhs, rhs) = poisson_gaussian_sum_check(a).unwrap();
        ensure(lhs < rhs, || format!("(d) fails at a={a}"))?;
    }
    notes.push("d");

    // (e) coefficient oracle
    let mut fields = 0;
    for disc in 5..=200u64 {
        let families: &[i8] = match is_valid_discriminant(disc) {
            Some(p) if !p.is_even() => &[-1],
            Some(_) if disc == 8 => &[-1, 1],
            _ => continue,
        };
        for &fam in families {
            let tw = build_canonical(disc, fam).unwrap().twist(1).unwrap();
            for n in 1..=2000u64 {
                ensure(coefficient_a_n(&tw, n) == oracle_a_n(&tw, n), || {
                    format!("(e) D={disc} n={n}")
                })?;
            }
            fields += 1;
        }
    }
    notes.push("e");

    // (f) Mellin identity
    for i in 0..10 {
        let s = 1.05 + 0.29 * i as f64;
        let r = mellin_identity_check(s).map_err(|e| e.to_string())?;
        ensure(r < 1e-8, || format!("(f) residual {r:e} at s={s}"))?;
    }
    notes.push("f");

    // (g) determinism under parallelism, across output formats
    let cfg = |jobs| ScanConfig {
        d_min: 1,
        d_max: 3000,
        twists: vec![1, -4, 5],
        jobs,
        ..ScanConfig::default()
    };
    let a = scan(&cfg(1)).map_err(|e| e.to_string())?;
    let b = scan(&cfg(6)).map_err(|e| e.to_string())?;
    let bytes = |rows: &[ScanRow], f| {
        let mut v = Vec::new();
        write_rows(rows, f, &mut v).unwrap();
        v
    };
    ensure(
        bytes(&a, OutputFormat::Csv) == bytes(&b, OutputFormat::Csv),
        || "(g) CSV differs".into(),
    )?;
    ensure(
        bytes(&a, OutputFormat::Json) == bytes(&b, OutputFormat::Json),
        || "(g) JSON differs".into(),
    )?;
    let again = verify_reference_table(&StandardKernel);
    ensure(again == verify_reference_table(&StandardKernel), || {
        "(g) table not reproducible".into()
    })?;
    notes.push("g");

    Ok(format!(
        "properties {} hold ({fields} fields in the coefficient oracle)",
        notes.join(",")
    ))
}

fn criterion_6() -> Outcome {
    let twists = [-4i64, 5, -5, -8, 13, -13];
    let opts = VerdictOptions::default();
    let (mut certified, mut rejected) = (0, 0);
    for disc in (5..=500u64).filter(|&d| d % 2 == 1 && is_valid_discriminant(d).is_some()) {
        let chi = build_canonical(disc, -1).unwrap();
        for d in twists {
            match chi.twist(d) {
                Err(Error::InvalidTwist(_)) => {
                    ensure(d == -5 || d == -13, || format!("d={d} wrongly rejected"))?;
                    rejected += 1;
                }
                Err(Error::TwistNotCoprime { .. }) => {}
                Err(e) => return Err(format!("D={disc} d={d}: {e}")),
                Ok(tw) => {
                    ensure(d != -5 && d != -13, || format!("d={d} accepted"))?;
                    if tw.root_number != -1 {
                        continue;
                    }
                    let rec = central_derivative(&tw, 1e-12).map_err(|e| e.to_string())?;
                    let err = rec.lambda_prime_error();
                    ensure(rec.lambda_prime.abs() > 10.0 * err, || {
                        format!("D={disc} d={d}: {} ± {err:e}", rec.lambda_prime)
                    })?;
                    let v = verdict(disc, d, -1, &opts).map_err(|e| e.to_string())?;
                    ensure(v.nonvanishing && v.method == Method::DirectTable, || {
                        format!("D={disc} d={d}: verdict")
                    })?;
                    certified += 1;
                }
            }
        }
    }
    Ok(format!("{certified} twisted derivatives certified nonzero; {rejected} non-fundamental twists rejected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("1 reference table", criterion_1),
        ("2 non-vanishing for D <= 10000", criterion_2),
        ("3 residue constants", criterion_3),
        ("4 contour constants", criterion_4),
        ("5 property suites", criterion_5),
        ("6 twist evaluations", criterion_6),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS ({detail})"),
            Err(why) => {
                println!("criterion {name}: FAIL ({why})");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
