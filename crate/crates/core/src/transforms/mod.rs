//! Forward transforms over the paraboloid family.
//!
//! * `R f(p, ω)`: Euclidean surface integral over `Z(p, ω)`.
//! * `M f(p, ω) = ∫ f dS / |∇θ| = p^{-1/2} R(r^{1/2} f)`, the coarea (thin
//!   slab) integral normalized by the θ-width of the slab.
//! * `M_b f(p, ω) = ∫ f |∇θ| dS = p^{1/2} R(r^{-1/2} f) = p M(r^{-1} f)`.
//!
//! The slab definition of `M` can be read with a slab of width ε in
//! `|x| - <x,ω>` (that is 2ε in θ) or of width ε in θ; the two differ by a
//! factor of two. Everything here uses the θ-width, which is the reading under
//! which `M` equals the surface integral against `dS/|∇θ|`.

mod slab;
mod surface;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sphere_rule, Direction, SphereRule};
use crate::phantom::PhantomSpec;
use crate::quadrature::integrate_adaptive;

pub use slab::{McEstimate, SlabOracle};
pub use surface::SurfaceIntegrator;

/// Resolution of the surface quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadParams {
    /// Gauss–Legendre nodes per radial panel.
    pub radial_order: usize,
    /// Panels between consecutive radial breakpoints.
    pub radial_panels: usize,
    /// Nodes on partially covered azimuthal arcs (Gaussian components).
    pub azimuth_nodes: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self { radial_order: 16, radial_panels: 4, azimuth_nodes: 32 }
    }
}

impl QuadParams {
    pub fn validate(&self) -> Result<()> {
        if self.radial_order < 4 || self.radial_panels < 1 || self.azimuth_nodes < 4 {
            return Err(Error::InvalidParameter(format!(
                "quadrature resolution too low: {self:?} (order and azimuth nodes must be >= 4)"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    R,
    M,
    Mb,
}

impl TransformKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransformKind::R => "R",
            TransformKind::M => "M",
            TransformKind::Mb => "Mb",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "R" | "r" => Some(TransformKind::R),
            "M" | "m" => Some(TransformKind::M),
            "Mb" | "MB" | "mb" => Some(TransformKind::Mb),
            _ => None,
        }
    }

    /// Value at one `(p, ω)` using a prepared integrator.
    pub fn evaluate(
        &self,
        integrator: &SurfaceIntegrator,
        spec: &PhantomSpec,
        p: f64,
        omega: &Direction,
    ) -> f64 {
        match self {
            TransformKind::R => integrator.weighted(spec, p, omega, 0.0),
            TransformKind::M => integrator.weighted(spec, p, omega, 0.5) / p.sqrt(),
            TransformKind::Mb => integrator.weighted(spec, p, omega, -0.5) * p.sqrt(),
        }
    }
}

fn check_inputs(spec: &PhantomSpec, p: f64, omega: &Direction, quad: &QuadParams) -> Result<()> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveP(p));
    }
    if omega.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: omega.dim() });
    }
    quad.validate()
}

/// `∫_{Z(p,ω)} |x|^k f dS`.
pub fn weighted_radon(
    spec: &PhantomSpec,
    p: f64,
    omega: &Direction,
    k: f64,
    quad: &QuadParams,
) -> Result<f64> {
    check_inputs(spec, p, omega, quad)?;
    Ok(SurfaceIntegrator::new(*quad).weighted(spec, p, omega, k))
}

/// Euclidean surface integral `R f(p, ω)`.
pub fn radon_parab(spec: &PhantomSpec, p: f64, omega: &Direction, quad: &QuadParams) -> Result<f64> {
    weighted_radon(spec, p, omega, 0.0, quad)
}

/// `M f(p, ω) = p^{-1/2} R(r^{1/2} f)(p, ω)`.
pub fn m_transform(spec: &PhantomSpec, p: f64, omega: &Direction, quad: &QuadParams) -> Result<f64> {
    Ok(weighted_radon(spec, p, omega, 0.5, quad)? / p.sqrt())
}

/// `M_b f(p, ω) = p^{1/2} R(r^{-1/2} f)(p, ω)`.
pub fn mb_transform(spec: &PhantomSpec, p: f64, omega: &Direction, quad: &QuadParams) -> Result<f64> {
    Ok(weighted_radon(spec, p, omega, -0.5, quad)? * p.sqrt())
}

/// `g₀(ω) = 4π ∫_0^∞ r f(rω) dr`, the `p → 0` limit of `M f(p, ω)` in space.
pub fn axial_ray_integral(spec: &PhantomSpec, omega: &Direction) -> Result<f64> {
    if spec.dim != 3 {
        return Err(Error::UnsupportedDimension(spec.dim));
    }
    let w = omega.as_point();
    let support = spec.support_radius();
    if support == 0.0 {
        return Ok(0.0);
    }
    // The ray enters and leaves each ball where |rω - c| = a.
    let mut cuts = Vec::new();
    for comp in &spec.components {
        let c = comp.center();
        let cw = c[0] * w[0] + c[1] * w[1] + c[2] * w[2];
        let disc = cw * cw - (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]) + comp.radius * comp.radius;
        if disc > 0.0 {
            cuts.push(cw - disc.sqrt());
            cuts.push(cw + disc.sqrt());
        }
    }
    let value = integrate_adaptive(
        |r| r * spec.eval(&[r * w[0], r * w[1], r * w[2]]),
        0.0,
        support,
        &cuts,
        1e-15,
        1e-13,
    )
    .value;
    Ok(4.0 * std::f64::consts::PI * value)
}

/// Sampling layout of a sinogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramParams {
    pub np: usize,
    pub p_max: f64,
    /// Gauss–Legendre polar order (spatial rules only).
    pub polar: usize,
    pub azimuth: usize,
    pub quad: QuadParams,
}

/// Transform values on the cell-centered grid `p_j = (j + 1/2) Δp`, `Δp = p_max / np`.
///
/// Values are stored direction-major: row `k` holds the profile for node `k`
/// of the direction rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SinogramGrid {
    pub dim: usize,
    pub kind: TransformKind,
    pub p_max: f64,
    pub np: usize,
    pub rule: SphereRule,
    pub values: Vec<f64>,
}

impl SinogramGrid {
    /// Grid filled from `f(p, ω)`, row by row in parallel.
    pub fn from_fn<F>(kind: TransformKind, p_max: f64, np: usize, rule: SphereRule, f: F) -> Self
    where
        F: Fn(f64, &Direction) -> f64 + Sync,
    {
        let dp = p_max / np as f64;
        let mut values = vec![0.0; np * rule.len()];
        values.par_chunks_mut(np.max(1)).zip(rule.nodes.par_iter()).for_each(|(row, omega)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f((j as f64 + 0.5) * dp, omega);
            }
        });
        Self { dim: rule.dim, kind, p_max, np, rule, values }
    }

    pub fn dp(&self) -> f64 {
        self.p_max / self.np as f64
    }

    pub fn p_at(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dp()
    }

    pub fn p_samples(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p_at(j)).collect()
    }

    pub fn n_directions(&self) -> usize {
        self.rule.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.np..(k + 1) * self.np]
    }
}

/// Samples `kind` applied to `spec` on the full `(p, ω)` grid.
pub fn forward_sinogram(
    spec: &PhantomSpec,
    kind: TransformKind,
    params: &SinogramParams,
) -> Result<SinogramGrid> {
    spec.validate()?;
    params.quad.validate()?;
    if params.np < 2 {
        return Err(Error::GridTooShort { len: params.np, min: 2 });
    }
    let support = spec.support_radius();
    if !(params.p_max >= support) || !(params.p_max > 0.0) {
        return Err(Error::SupportExceedsGrid { p_max: params.p_max, support });
    }
    let rule = sphere_rule(spec.dim, params.polar, params.azimuth)?;
    let integrator = SurfaceIntegrator::new(params.quad);
    Ok(SinogramGrid::from_fn(kind, params.p_max, params.np, rule, |p, omega| {
        kind.evaluate(&integrator, spec, p, omega)
    }))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::geometry::{paraboloid_point, Branch, ParaboloidCoords};
    use crate::phantom::Component;
    use crate::quadrature::GlRule;

    fn z_axis() -> Direction {
        Direction::new(&[0.0, 0.0, 1.0]).unwrap()
    }

    /// Independent route: direct (r, φ) quadrature through `paraboloid_point`.
    fn brute_force_r(spec: &PhantomSpec, p: f64, omega: &Direction, k: f64) -> f64 {
        let a = spec.support_radius();
        let gl = GlRule::new(20);
        if spec.dim == 3 {
            let n_phi = 720;
            gl.integrate_composite(0.0, (a - p).max(0.0).sqrt(), 200, |s| {
                let r = p + s * s;
                let mut ring = 0.0;
                for j in 0..n_phi {
                    let phi = 2.0 * PI * j as f64 / n_phi as f64;
                    let x = paraboloid_point(&ParaboloidCoords {
                        p,
                        axis: *omega,
                        r,
                        azimuth: phi,
                        branch: Branch::Plus,
                    })
                    .unwrap();
                    ring += spec.eval(&x);
                }
                ring * 2.0 * PI / n_phi as f64 * 2.0 * (p * r).sqrt() * 2.0 * s * r.powf(k)
            })
        } else {
            let mut total = 0.0;
            for branch in [Branch::Plus, Branch::Minus] {
                total += gl.integrate_composite(0.0, (a - p).max(0.0).sqrt(), 400, |s| {
                    let r = p + s * s;
                    let x = paraboloid_point(&ParaboloidCoords { p, axis: *omega, r, azimuth: 0.0, branch })
                        .unwrap();
                    spec.eval(&x) * 2.0 * r.sqrt() * r.powf(k)
                });
            }
            total
        }
    }

    #[test]
    fn matches_brute_force_off_center_3d() {
        let spec = PhantomSpec::new(
            3,
            vec![
                Component::polybump(&[0.3, -0.2, 0.1], 0.4, 1.0),
                Component::gaussian(&[-0.1, 0.2, -0.3], 0.5, 0.7),
            ],
        )
        .unwrap();
        let omega = Direction::new(&[0.2, 0.5, -0.7]).unwrap();
        for &p in &[0.05, 0.2, 0.4] {
            let fast = radon_parab(&spec, p, &omega, &QuadParams::default()).unwrap();
            let brute = brute_force_r(&spec, p, &omega, 0.0);
            assert!((fast - brute).abs() < 2e-6 * brute.abs().max(1e-3), "p={p}: {fast} vs {brute}");
        }
    }

    #[test]
    fn matches_brute_force_off_center_2d() {
        let spec = PhantomSpec::new(
            2,
            vec![
                Component::polybump(&[0.3, -0.2], 0.4, 1.0),
                Component::gaussian(&[-0.1, 0.25], 0.5, 0.7),
            ],
        )
        .unwrap();
        let omega = Direction::new(&[0.6, 0.8]).unwrap();
        for &p in &[0.02, 0.15, 0.3] {
            for k in [0.0, 0.5, -0.5] {
                let fast = weighted_radon(&spec, p, &omega, k, &QuadParams::default()).unwrap();
                let brute = brute_force_r(&spec, p, &omega, k);
                assert!((fast - brute).abs() < 1e-8 * brute.abs().max(1.0), "p={p} k={k}: {fast} vs {brute}");
            }
        }
    }

    #[test]
    fn centered_polybump_closed_forms() {
        let spec = PhantomSpec::centered_polybump(3);
        let q = QuadParams::default();
        let p = 0.5;
        let m = m_transform(&spec, p, &z_axis(), &q).unwrap();
        assert!((m - PI / 2.0 * 0.75f64.powi(4)).abs() < 1e-13);
        let mb = mb_transform(&spec, p, &z_axis(), &q).unwrap();
        // 4π p ∫_p^1 (1-u²)³ du
        let poly = |u: f64| u - u.powi(3) + 0.6 * u.powi(5) - u.powi(7) / 7.0;
        assert!((mb - 4.0 * PI * p * (poly(1.0) - poly(p))).abs() < 1e-13);
    }

    #[test]
    fn vanishes_beyond_support() {
        let spec = PhantomSpec::new(3, vec![Component::polybump(&[0.2, 0.0, 0.1], 0.3, 2.0)]).unwrap();
        let q = QuadParams::default();
        let p = 2.0 * spec.support_radius();
        for kind in [TransformKind::R, TransformKind::M, TransformKind::Mb] {
            let integ = SurfaceIntegrator::new(q);
            assert_eq!(kind.evaluate(&integ, &spec, p, &z_axis()), 0.0);
        }
    }

    #[test]
    fn rejects_nonpositive_p_and_dimension_mismatch() {
        let spec = PhantomSpec::centered_polybump(3);
        let q = QuadParams::default();
        assert!(matches!(radon_parab(&spec, 0.0, &z_axis(), &q), Err(Error::NonPositiveP(_))));
        assert!(matches!(m_transform(&spec, -1.0, &z_axis(), &q), Err(Error::NonPositiveP(_))));
        assert!(matches!(mb_transform(&spec, -1.0, &z_axis(), &q), Err(Error::NonPositiveP(_))));
        let planar = Direction::new(&[1.0, 0.0]).unwrap();
        assert!(matches!(radon_parab(&spec, 0.3, &planar, &q), Err(Error::DimensionMismatch { .. })));
        let coarse = QuadParams { radial_order: 2, ..q };
        assert!(radon_parab(&spec, 0.3, &z_axis(), &coarse).is_err());
    }

    #[test]
    fn axial_ray_examples() {
        let w = Direction::new(&[0.3, -0.4, 0.5]).unwrap();
        let g0 = axial_ray_integral(&PhantomSpec::centered_polybump(3), &w).unwrap();
        assert!((g0 - PI / 2.0).abs() < 1e-13);
        assert_eq!(axial_ray_integral(&PhantomSpec::empty(3), &w).unwrap(), 0.0);
        let off = PhantomSpec::new(3, vec![Component::polybump(&[0.0, 0.0, -0.6], 0.3, 1.0)]).unwrap();
        assert_eq!(axial_ray_integral(&off, &z_axis()).unwrap(), 0.0);
        assert!(axial_ray_integral(&PhantomSpec::centered_polybump(2), &w).is_err());
    }

    #[test]
    fn forward_sinogram_checks_support() {
        let spec = PhantomSpec::centered_polybump(3);
        let params = SinogramParams { np: 16, p_max: 0.5, polar: 4, azimuth: 8, quad: QuadParams::default() };
        assert!(matches!(
            forward_sinogram(&spec, TransformKind::R, &params),
            Err(Error::SupportExceedsGrid { .. })
        ));
        let ok = SinogramParams { p_max: 1.0, ..params };
        let sino = forward_sinogram(&spec, TransformKind::M, &ok).unwrap();
        assert_eq!(sino.values.len(), 16 * 32);
        let p = sino.p_at(3);
        assert!((sino.row(7)[3] - PI / 2.0 * (1.0 - p * p).powi(4)).abs() < 1e-13);
    }
}

#[cfg(test)]
mod properties {
    use std::f64::consts::PI;

    use nalgebra::{Rotation3, Unit, Vector3};
    use proptest::prelude::*;

    use super::*;
    use crate::geometry::Point;
    use crate::phantom::Component;

    fn direction3() -> impl Strategy<Value = Direction> {
        (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(c, a)| Direction::from_spherical(c, a))
    }

    fn rotation() -> impl Strategy<Value = [[f64; 3]; 3]> {
        (direction3(), 0.0..2.0 * PI).prop_map(|(axis, angle)| {
            let a = axis.as_point();
            let r = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::new(a[0], a[1], a[2])), angle);
            std::array::from_fn(|i| std::array::from_fn(|j| r.matrix()[(i, j)]))
        })
    }

    fn apply(m: &[[f64; 3]; 3], x: &Point) -> Point {
        std::array::from_fn(|i| m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2])
    }

    fn two_bumps() -> PhantomSpec {
        PhantomSpec::new(
            3,
            vec![Component::polybump(&[0.2, -0.1, 0.3], 0.4, 1.0), Component::gaussian(&[-0.3, 0.2, 0.0], 0.5, 0.7)],
        )
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn rotation_equivariant(m in rotation(), w in direction3(), p in 0.05..1.2f64) {
            let spec = two_bumps();
            let rotated = spec.transformed(&m);
            let rw = Direction::new(&apply(&m, w.as_point())).unwrap();
            let q = QuadParams::default();
            for (a, b) in [
                (radon_parab(&spec, p, &w, &q).unwrap(), radon_parab(&rotated, p, &rw, &q).unwrap()),
                (m_transform(&spec, p, &w, &q).unwrap(), m_transform(&rotated, p, &rw, &q).unwrap()),
                (mb_transform(&spec, p, &w, &q).unwrap(), mb_transform(&rotated, p, &rw, &q).unwrap()),
            ] {
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{} vs {}", a, b);
            }
        }

        #[test]
        fn linear(alpha in -3.0..3.0f64, beta in -3.0..3.0f64, w in direction3(), p in 0.05..1.0f64) {
            let f = PhantomSpec::centered_polybump(3);
            let g = two_bumps();
            let combo = f.scaled(alpha).plus(&g.scaled(beta));
            let q = QuadParams::default();
            for kind in [TransformKind::R, TransformKind::M, TransformKind::Mb] {
                let it = SurfaceIntegrator::new(q);
                let lhs = kind.evaluate(&it, &combo, p, &w);
                let rhs = alpha * kind.evaluate(&it, &f, p, &w) + beta * kind.evaluate(&it, &g, p, &w);
                prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
            }
        }

        #[test]
        fn dilation_scaling_law(w in direction3(), p in 0.05..1.8f64, dim in 2usize..=3) {
            let f = PhantomSpec::new(dim, vec![Component::polybump(&[0.2, -0.1, 0.15][..dim], 0.6, 1.0)]).unwrap();
            let f2 = f.dilated(2.0);
            let w = if dim == 2 { Direction::from_angle(w.as_point()[0].atan2(w.as_point()[1])) } else { w };
            let q = QuadParams::default();
            let scale = 2f64.powi(dim as i32 - 1);
            for (a, b) in [
                (radon_parab(&f2, p, &w, &q).unwrap(), scale * radon_parab(&f, p / 2.0, &w, &q).unwrap()),
                (m_transform(&f2, p, &w, &q).unwrap(), scale * m_transform(&f, p / 2.0, &w, &q).unwrap()),
            ] {
                prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-12), "{} vs {}", a, b);
            }
        }
    }
}
