//! Empirical convergence orders from refinement ladders.

use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::inversion::{filter_profile, FilterKind};
use crate::phantom::{Component, PhantomSpec};
use crate::quadrature::log_log_slope;
use crate::transforms::{QuadParams, SlabOracle, SurfaceIntegrator, TransformKind};

use super::{CheckRecord, Comparison, Provenance, VerificationReport};

/// Operations with a study, and their default ladders.
pub const STUDIES: [(&str, &[usize]); 3] =
    [("forward3d", &[2, 4, 8, 16, 64]), ("filter", &[100, 200, 400, 800]), ("mc", &[100_000, 400_000, 1_600_000])];

fn replay(op: &str, ladder: &[usize]) -> String {
    let l: Vec<String> = ladder.iter().map(|v| v.to_string()).collect();
    format!("parafbp convergence --op {op} --ladder {}", l.join(","))
}

fn check_ladder(ladder: &[usize]) -> Result<()> {
    if ladder.len() < 3 {
        return Err(Error::DegenerateLadder(format!("need at least 3 levels, got {}", ladder.len())));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) || ladder[0] == 0 {
        return Err(Error::DegenerateLadder("levels must be positive and strictly increasing".into()));
    }
    Ok(())
}

/// Runs the study `op` over `ladder` and reports per-level errors plus the fitted order.
///
/// * `forward3d`: panels of order-4 Gauss–Legendre for `R f` of an off-center
///   polybump; error against the finest level, order expected ≥ 2.
/// * `filter`: Cormack filter of `p^{3/2} e^{-p}` on `ladder[i]` cells of `(0, 2]`
///   against the symbolic derivative, order expected ≈ 2.
/// * `mc`: slab Monte-Carlo standard error against sample count, slope ≈ -1/2.
pub fn convergence_study(op: &str, ladder: &[usize]) -> Result<VerificationReport> {
    check_ladder(ladder)?;
    let mut rep = VerificationReport::new(format!("convergence:{op}"));
    let replay = replay(op, ladder);
    let xs: Vec<f64> = ladder.iter().map(|&v| v as f64).collect();
    match op {
        "forward3d" => {
            let spec = PhantomSpec::new(3, vec![Component::polybump(&[0.2, -0.1, 0.15], 0.6, 1.0)])?;
            let w = Direction::new(&[0.3, 0.4, 0.866])?;
            let values: Vec<f64> = ladder
                .iter()
                .map(|&panels| {
                    let q = QuadParams { radial_order: 4, radial_panels: panels, ..QuadParams::default() };
                    TransformKind::R.evaluate(&SurfaceIntegrator::new(q), &spec, 0.3, &w)
                })
                .collect();
            let finest = *values.last().unwrap();
            let errs: Vec<f64> = values[..values.len() - 1].iter().map(|v| (v - finest).abs()).collect();
            for (n, e) in ladder.iter().zip(&errs) {
                rep.push(CheckRecord::measured(
                    format!("forward3d.err.{n}"),
                    "surface quadrature self-convergence",
                    *e,
                    0.0,
                    Provenance::Derived,
                    "finest ladder level",
                    replay.clone(),
                ));
            }
            let order = -log_log_slope(&xs[..errs.len()], &errs);
            rep.push(CheckRecord::check(
                "forward3d.order",
                "forward quadrature order on a C² bump",
                order,
                2.0,
                0.0,
                Comparison::AtLeast,
                Provenance::Derived,
                "self-convergence against the finest level",
                replay,
            ));
        }
        "filter" => {
            let errs: Vec<f64> = ladder
                .iter()
                .map(|&n| {
                    let dp = 2.0 / n as f64;
                    let ps: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * dp).collect();
                    let profile: Vec<f64> = ps.iter().map(|p| p.powf(1.5) * (-p).exp()).collect();
                    let out = filter_profile(&profile, dp, FilterKind::Cormack3d)?;
                    // the last two cells carry the nested one-sided stencils
                    Ok(ps.iter()
                        .zip(&out)
                        .take(n - 2)
                        .map(|(p, v)| (v - (-p).exp() * (1.0 - 3.0 * p + p * p)).abs())
                        .fold(0.0, f64::max))
                })
                .collect::<Result<_>>()?;
            for (n, e) in ladder.iter().zip(&errs) {
                rep.push(CheckRecord::measured(
                    format!("filter.err.{n}"),
                    "nested Cormack stencil against w + 3p w' + p² w''",
                    *e,
                    0.0,
                    Provenance::Derived,
                    "symbolic derivative of e^{-p}",
                    replay.clone(),
                ));
            }
            let order = -log_log_slope(&xs, &errs);
            rep.push(CheckRecord::check(
                "filter.order",
                "second-order derivative stencils",
                order,
                2.0,
                0.15,
                Comparison::Absolute,
                Provenance::Derived,
                "symbolic derivative of e^{-p}",
                replay,
            ));
        }
        "mc" => {
            let spec = PhantomSpec::centered_polybump(3);
            let w = Direction::new(&[0.0, 0.6, 0.8])?;
            let oracle = SlabOracle::new(&spec).with_radial_exponent(-1.0);
            let ses: Vec<f64> = ladder
                .iter()
                .map(|&n| oracle.estimate(0.3, &w, 1e-2, n as u64, 11).map(|e| e.std_error))
                .collect::<Result<_>>()?;
            for (n, e) in ladder.iter().zip(&ses) {
                rep.push(CheckRecord::measured(
                    format!("mc.se.{n}"),
                    "slab estimator standard error",
                    *e,
                    0.0,
                    Provenance::Exact,
                    "sample variance",
                    replay.clone(),
                ));
            }
            rep.push(CheckRecord::check(
                "mc.order",
                "Monte-Carlo error decays like N^{-1/2}",
                log_log_slope(&xs, &ses),
                -0.5,
                0.1,
                Comparison::Absolute,
                Provenance::Exact,
                "central limit theorem",
                replay,
            ));
        }
        other => return Err(Error::UnknownSuite(format!("convergence op {other}"))),
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_ladders_rejected() {
        assert!(matches!(convergence_study("filter", &[10, 20]), Err(Error::DegenerateLadder(_))));
        assert!(matches!(convergence_study("filter", &[10, 20, 20]), Err(Error::DegenerateLadder(_))));
        assert!(matches!(convergence_study("nope", &[10, 20, 40]), Err(Error::UnknownSuite(_))));
    }

    #[test]
    fn default_ladders_pass() {
        for (op, ladder) in STUDIES {
            let rep = convergence_study(op, ladder).unwrap();
            assert!(rep.passed(), "{}", rep.to_text());
        }
    }
}
