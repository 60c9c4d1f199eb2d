//! The named verification suites.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::framework::{
    affine_fit, banded_rule, conjugate_check, db_constant, db_direct, n_beta_constant, singular_axis,
    theta_kernel_probe, ThetaProbeResult,
};
use crate::geometry::{incidence, norm, sphere_rule, Direction, Point};
use crate::inversion::{DataKind, FilterKind};
use crate::phantom::PhantomSpec;
use crate::quadrature::{integrate_adaptive, log_log_slope};
use crate::transforms::{axial_ray_integral, mb_transform, m_transform, radon_parab, QuadParams, SlabOracle};

use super::convergence::{convergence_study, STUDIES};
use super::oracles::{
    closed_form, polybump, predicted_radial2, predicted_radial3, radial_reduction, weighted_identity_sides,
};
use super::pipelines::{cormack_semi_discrete, cormack_volume_study, point_reconstruction};
use super::{CheckRecord, Comparison, Provenance, VerificationReport};

pub const SUITES: [&str; 6] = ["constants", "identities", "radial", "roundtrip", "theta", "convergence"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Include the volume reconstructions (minutes rather than seconds).
    pub full: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 7, full: false }
    }
}

impl SuiteConfig {
    fn replay(&self, suite: &str) -> String {
        let full = if self.full { " --full" } else { "" };
        format!("parafbp verify --suite {suite} --seed {}{full}", self.seed)
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new(name);
    let replay = cfg.replay(name);
    match name {
        "constants" => constants(&mut rep, &replay)?,
        "identities" => identities(&mut rep, cfg, &replay)?,
        "radial" => radial(&mut rep, &replay)?,
        "roundtrip" => roundtrip(&mut rep, cfg, &replay)?,
        "theta" => theta(&mut rep, &replay)?,
        "convergence" => {
            for (op, ladder) in STUDIES {
                rep.extend(convergence_study(op, ladder)?);
            }
        }
        other => return Err(Error::UnknownSuite(other.to_string())),
    }
    Ok(rep)
}

fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    Direction::from_spherical(2.0 * rng.random::<f64>() - 1.0, 2.0 * PI * rng.random::<f64>())
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    std::array::from_fn(|_| 2.0 * rng.random::<f64>() - 1.0)
}

fn constants(rep: &mut VerificationReport, replay: &str) -> Result<()> {
    for n in 2..=4 {
        rep.push(CheckRecord::check(
            format!("db.n{n}"),
            "D_b = 2^{n-2} for the paraboloid family",
            db_constant(n, 64)?,
            2f64.powi(n as i32 - 2),
            1e-9,
            Comparison::Absolute,
            Provenance::Published,
            "Gauss-Legendre on the γ-reduced integrand (2cos(γ/2))^{n-2}",
            replay,
        ));
    }
    rep.push(CheckRecord::check(
        "db.direct.n3",
        "γ-reduction of D_b reproduces the sphere integral",
        db_direct(&[0.3, -0.2, 0.5], 3, 64, 16)?,
        2.0,
        1e-6,
        Comparison::Absolute,
        Provenance::Derived,
        "unsimplified |∇θ|^{-1} on a polar grid about x/|x|",
        replay,
    ));
    for (n, want) in [(2, 1.0 / (4.0 * PI * PI)), (3, 1.0 / (8.0 * PI * PI))] {
        rep.push(CheckRecord::check(
            format!("nbeta.n{n}"),
            "N_β normalization with j = 2π equals the filter prefactor",
            n_beta_constant(n),
            want,
            1e-15,
            Comparison::Relative,
            Provenance::Exact,
            "constant matching against the back-projection prefactors",
            replay,
        ));
    }
    Ok(())
}

fn identities(rep: &mut VerificationReport, cfg: &SuiteConfig, replay: &str) -> Result<()> {
    let spec = PhantomSpec::centered_polybump(3);
    let quad = QuadParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let samples: Vec<(f64, Direction)> =
        (0..20).map(|_| (0.05 + 0.9 * rng.random::<f64>(), random_direction(&mut rng))).collect();

    let mut worst: f64 = 0.0;
    let mut engine = Vec::with_capacity(samples.len());
    for (p, w) in &samples {
        let a = mb_transform(&spec, *p, w, &quad)?;
        let (b, c) = weighted_identity_sides(&spec, *p, w, 24, 4)?;
        let rel = |u: f64, v: f64| (u - v).abs() / u.abs().max(v.abs());
        worst = worst.max(rel(a, b)).max(rel(a, c)).max(rel(b, c));
        engine.push(a);
    }
    rep.push(CheckRecord::check(
        "weighted.pairwise",
        "p^{1/2}R(r^{-1/2}f) = p·M(r^{-1}f) = M_b f at 20 random (p, ω)",
        worst,
        0.0,
        1e-10,
        Comparison::Absolute,
        Provenance::Published,
        "engine value against brute-force surface quadrature of f/(r|∇θ|) and f|∇θ|",
        replay,
    ));

    let oracle = SlabOracle::new(&spec).with_radial_exponent(-1.0);
    for (k, ((p, w), a)) in samples.iter().zip(&engine).enumerate() {
        let est = oracle.estimate(*p, w, 1e-3, 10_000_000, cfg.seed.wrapping_add(k as u64))?;
        rep.push(CheckRecord::check(
            format!("weighted.slab.{k}"),
            "M_b f against the thin-slab limit p·(1/ε)∫ f/r over p ≤ θ ≤ p+ε",
            p * est.mean,
            *a,
            3.0 * p * est.std_error,
            Comparison::Absolute,
            Provenance::Derived,
            "seeded Monte-Carlo, ε = 1e-3, N = 1e7, 3 standard errors",
            replay,
        ));
    }

    let ph = polybump();
    for r in [0.25, 0.5, 0.75] {
        let lhs = integrate_adaptive(|u| u.sqrt() * (1.5 * (ph.f)(u) + u * (ph.df)(u)), 0.0, r, &[], 1e-15, 1e-14).value;
        rep.push(CheckRecord::check(
            format!("ibp.r{r}"),
            "∫_0^r √u((3/2)f + u f')du = r^{3/2} f(r)",
            lhs,
            r.powf(1.5) * (ph.f)(r),
            1e-9,
            Comparison::Absolute,
            Provenance::Derived,
            "adaptive Gauss-Kronrod",
            replay,
        ));
    }

    let rule = sphere_rule(3, 12, 24)?;
    let (mut resid, mut sign_changes, mut conj, mut gap_err): (f64, usize, usize, f64) = (0.0, 0, 0, 0.0);
    let mut at_xi_max = f64::NEG_INFINITY;
    let pairs = 100;
    for _ in 0..pairs {
        let (x, y) = (random_point(&mut rng), random_point(&mut rng));
        let fit = affine_fit(&x, &y, &rule)?;
        resid = resid.max(fit.max_residual);
        sign_changes += fit.changes_sign() as usize;
        let c = conjugate_check(&x, &y, &rule, 1e-9)?;
        conj += c.conjugate as usize;
        let half: f64 = 0.5 * norm(&std::array::from_fn(|k| x[k] - y[k]));
        gap_err = gap_err.max((c.min_gradient_gap - half).abs());
        let xi = Direction::new(&x)?;
        at_xi_max = at_xi_max.max(incidence(&x, xi.as_point()) - incidence(&y, xi.as_point()));
    }
    rep.push(CheckRecord::check(
        "incidence.affine",
        "θ(x,ω) - θ(y,ω) is affine in ω",
        resid,
        0.0,
        1e-12,
        Comparison::Absolute,
        Provenance::Published,
        "least-squares fit over 288 rule nodes, 100 seeded pairs",
        replay,
    ));
    rep.push(CheckRecord::check(
        "incidence.sign_change",
        "θ(x,·) - θ(y,·) has a zero on the sphere",
        sign_changes as f64,
        pairs as f64,
        0.0,
        Comparison::Absolute,
        Provenance::Published,
        "sign of the difference at rule nodes",
        replay,
    ));
    rep.push(CheckRecord::check(
        "incidence.negative_at_xi",
        "θ(x,ξ) - θ(y,ξ) < 0 at ξ = x/|x|",
        at_xi_max,
        0.0,
        0.0,
        Comparison::AtMost,
        Provenance::Published,
        "direct evaluation",
        replay,
    ));
    rep.push(CheckRecord::check(
        "conjugate.none",
        "no conjugate points",
        conj as f64,
        0.0,
        0.0,
        Comparison::Absolute,
        Provenance::Exact,
        "node search with ω-gradient gap",
        replay,
    ));
    rep.push(CheckRecord::check(
        "conjugate.gap",
        "ω-gradient gap is |x - y|/2",
        gap_err,
        0.0,
        1e-15,
        Comparison::Absolute,
        Provenance::Exact,
        "d_ωθ(x,ω) = -x/2",
        replay,
    ));
    Ok(())
}

fn radial(rep: &mut VerificationReport, replay: &str) -> Result<()> {
    let spec = PhantomSpec::centered_polybump(3);
    let quad = QuadParams::default();
    let w = Direction::new(&[0.36, -0.48, 0.8])?;
    for p in [0.1, 0.25, 0.5] {
        rep.push(CheckRecord::check(
            format!("mf.p{p}"),
            "M f of the centered polybump",
            m_transform(&spec, p, &w, &quad)?,
            closed_form::mf(p),
            1e-6,
            Comparison::Relative,
            Provenance::Derived,
            "closed form (π/2)(1 - p²)⁴",
            replay,
        ));
    }

    let g0 = axial_ray_integral(&spec, &w)?;
    rep.push(CheckRecord::check(
        "mf.g0",
        "M f(p) → g₀ = 4π∫ r f(rω) dr as p → 0",
        g0,
        0.5 * PI,
        1e-12,
        Comparison::Relative,
        Provenance::Derived,
        "adaptive ray integral",
        replay,
    ));
    let ps: Vec<f64> = (0..9).map(|k| 1e-3 * 10f64.powf(k as f64 / 4.0)).collect();
    let devs: Vec<f64> =
        ps.iter().map(|&p| m_transform(&spec, p, &w, &quad).map(|m| (m - g0).abs())).collect::<Result<_>>()?;
    rep.push(CheckRecord::check(
        "mf.vertex_slope",
        "|M f(p) - g₀| ≤ C p near the vertex",
        log_log_slope(&ps, &devs),
        0.9,
        0.0,
        Comparison::AtLeast,
        Provenance::Published,
        "log-log fit on p ∈ [1e-3, 1e-1]",
        replay,
    ));

    let rf: Vec<f64> = {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        (0..20).map(|_| radon_parab(&spec, 0.25, &random_direction(&mut rng), &quad)).collect::<Result<_>>()?
    };
    rep.push(CheckRecord::check(
        "rf.p0.25",
        "R f(0.25) of the centered polybump",
        rf[0],
        closed_form::rf(0.25),
        1e-6,
        Comparison::Relative,
        Provenance::Derived,
        "antiderivative of √u(1-u²)³",
        replay,
    ));
    let (lo, hi) = rf.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
    rep.push(CheckRecord::check(
        "rf.isotropy",
        "R f of a radial phantom is direction independent",
        (hi - lo) / hi.abs(),
        0.0,
        1e-8,
        Comparison::Absolute,
        Provenance::Exact,
        "spread over 20 random directions",
        replay,
    ));
    rep.push(CheckRecord::check(
        "mbf.p0.5",
        "M_b f(0.5) of the centered polybump",
        mb_transform(&spec, 0.5, &w, &quad)?,
        closed_form::mbf(0.5),
        1e-9,
        Comparison::Relative,
        Provenance::Derived,
        "4πp∫_p^1 (1-u²)³ du",
        replay,
    ));

    rep.push(CheckRecord::check(
        "reduction.const",
        "radial reduction of 1 is the solid angle",
        radial_reduction(|_| 1.0, 0.7, 3, &[])?,
        4.0 * PI,
        1e-12,
        Comparison::Relative,
        Provenance::Exact,
        "total solid angle",
        replay,
    ));
    rep.push(CheckRecord::check(
        "reduction.linear",
        "radial reduction of p at r = 1 is 2π",
        radial_reduction(|p| p, 1.0, 3, &[])?,
        2.0 * PI,
        1e-12,
        Comparison::Relative,
        Provenance::Exact,
        "∫_0^1 t dt",
        replay,
    ));
    let g = |p: f64| p * closed_form::mf(p);
    let x = [0.0, 0.42, 0.56];
    let direct = sphere_rule(3, 12, 24)?.integrate(|w| g(incidence(&x, w.as_point())));
    rep.push(CheckRecord::check(
        "reduction.self",
        "radial reduction of p·M f equals direct sphere quadrature at |x| = 0.7",
        radial_reduction(g, 0.7, 3, &[])?,
        direct,
        1e-8,
        Comparison::Relative,
        Provenance::Derived,
        "Gauss-Legendre × azimuth product rule",
        replay,
    ));
    Ok(())
}

fn roundtrip(rep: &mut VerificationReport, cfg: &SuiteConfig, replay: &str) -> Result<()> {
    let ph = polybump();
    let radii: Vec<f64> = (0..=80).map(|k| 0.1 + 0.01 * k as f64).collect();
    let semi = cormack_semi_discrete(4096, &radii)?;
    let worst = semi.iter().map(|(_, v, t)| ((v - t) / t).abs()).fold(0.0, f64::max);
    rep.push(CheckRecord::check(
        "cormack.semi_discrete",
        "Cormack inversion is exact on radial data",
        worst,
        0.0,
        5e-3,
        Comparison::Absolute,
        Provenance::Derived,
        "Np = 4096 filtered profile with radial reduction, max relative error on r ∈ [0.1, 0.9]",
        replay,
    ));

    let spec3 = PhantomSpec::centered_polybump(3);
    let pts3: Vec<Point> = [0.3, 0.5, 0.7].iter().map(|r| [0.48 * r, -0.6 * r, 0.64 * r]).collect();
    let cormack = point_reconstruction(&spec3, FilterKind::Cormack3d, 512, 24, 48, &pts3)?;
    rep.push(CheckRecord::check(
        "cormack.r0.5",
        "Cormack pipeline recovers f(0.5) = 0.421875",
        cormack[1],
        0.421875,
        1e-2,
        Comparison::Relative,
        Provenance::Derived,
        "phantom value",
        replay,
    ));

    for data in [DataKind::M, DataKind::R] {
        let kind = FilterKind::Palamodov3d(data);
        let got = point_reconstruction(&spec3, kind, 512, 24, 48, &pts3)?;
        for (k, r) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            let d = data.as_str();
            rep.push(CheckRecord::check(
                format!("palamodov3d.{d}.r{r}"),
                "spatial Palamodov pipeline against its radial reduction",
                got[k],
                predicted_radial3(&ph, kind, r)?,
                2e-2,
                Comparison::Relative,
                Provenance::Derived,
                "exact filtering of 1D radial data plus radial reduction",
                replay,
            ));
            rep.push(CheckRecord::measured(
                format!("palamodov3d.{d}.r{r}.phantom"),
                "spatial Palamodov output against the phantom",
                got[k],
                (ph.f)(r),
                Provenance::Derived,
                "phantom value",
                replay,
            ));
        }
    }

    let spec2 = PhantomSpec::centered_polybump(2);
    let pts2: Vec<Point> = [0.3, 0.5, 0.7].iter().map(|r| [0.6 * r, 0.8 * r, 0.0]).collect();
    for data in [DataKind::R, DataKind::M] {
        let kind = FilterKind::Palamodov2d(data);
        let got = point_reconstruction(&spec2, kind, 1024, 0, 512, &pts2)?;
        for (k, r) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            let d = data.as_str();
            rep.push(CheckRecord::check(
                format!("palamodov2d.{d}.r{r}"),
                "planar Palamodov pipeline against its nested radial reduction",
                got[k],
                predicted_radial2(&ph, data, r)?,
                2e-2,
                Comparison::Relative,
                Provenance::Derived,
                "1D radial data, principal value by subtraction, radial reduction",
                replay,
            ));
            rep.push(CheckRecord::measured(
                format!("palamodov2d.{d}.r{r}.phantom"),
                "planar Palamodov output against the phantom",
                got[k],
                (ph.f)(r),
                Provenance::Derived,
                "phantom value",
                replay,
            ));
        }
    }

    if cfg.full {
        let base = cormack_volume_study(1024, 48, 96, 64)?;
        rep.push(CheckRecord::check(
            "cormack.volume.l2",
            "Cormack pipeline on a 64³ grid",
            base.l2_rel,
            0.0,
            5e-2,
            Comparison::Absolute,
            Provenance::Derived,
            "relative L2 error against the phantom on 0.1 ≤ r ≤ 0.95",
            replay,
        ));
        let fine = cormack_volume_study(2048, 96, 192, 64)?;
        rep.push(CheckRecord::check(
            "cormack.volume.refined",
            "Cormack volume error decreases when Np and directions double",
            fine.l2_rel,
            base.l2_rel,
            0.0,
            Comparison::AtMost,
            Provenance::Derived,
            "relative L2 error at doubled resolution",
            replay,
        ));
    }
    Ok(())
}

/// Probe points and ladder for the remainder kernel.
const THETA_X: Point = [0.0, 0.0, 0.5];
const THETA_Y: Point = [0.0, 0.0, -0.5];
const THETA_EPS: f64 = 0.1;
const THETA_ETAS: [f64; 3] = [1e-1, 1e-2, 1e-3];
const THETA_PANELS: usize = 2000;

/// The tabulated Θ probes at the suite's resolution, one per η.
pub fn theta_probe_table() -> Result<Vec<ThetaProbeResult>> {
    let rule = banded_rule(&singular_axis(&THETA_X, &THETA_Y)?, 10 * THETA_PANELS, 8)?;
    THETA_ETAS.iter().map(|&eta| theta_kernel_probe(&THETA_X, &THETA_Y, THETA_EPS, eta, &rule)).collect()
}

fn theta(rep: &mut VerificationReport, replay: &str) -> Result<()> {
    let axis = singular_axis(&THETA_X, &THETA_Y)?;
    let coarse = banded_rule(&axis, THETA_PANELS, 8)?;
    let fine = banded_rule(&axis, 10 * THETA_PANELS, 8)?;
    for eta in THETA_ETAS {
        let a = theta_kernel_probe(&THETA_X, &THETA_Y, THETA_EPS, eta, &coarse)?;
        let b = theta_kernel_probe(&THETA_X, &THETA_Y, THETA_EPS, eta, &fine)?;
        rep.push(CheckRecord::measured(
            format!("theta.eta{eta:e}"),
            "Re iⁿ Θ_ε with -i0 replaced by -iη",
            b.value,
            0.0,
            Provenance::Derived,
            "banded Gauss-Legendre rule about x - y",
            replay,
        ));
        rep.push(CheckRecord::check(
            format!("theta.eta{eta:e}.resolution"),
            "Θ probe quadrature self-converges under 10× refinement",
            (a.value - b.value).abs() / b.value.abs(),
            0.0,
            1e-2,
            Comparison::Absolute,
            Provenance::Derived,
            "same integral at 10× the polar panels",
            replay,
        ));
    }
    Ok(())
}
