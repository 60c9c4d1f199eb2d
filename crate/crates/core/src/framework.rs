//! Probes of the generating-function machinery, specialized to
//! `Φ(x, p, ω) = θ(x, ω) - p` with weight `b = |∇ₓθ|²`, `β = 1`.
//!
//! The reconstruction operator itself lives in [`crate::inversion`]. What sits
//! here are the ingredients its derivation leans on: the constant `D_b`, the
//! remainder kernel `Θ`, and the absence of conjugate points.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{dot, grad_theta_norm, incidence, norm, sphere_area, Direction, Point, RuleScheme, SphereRule};
use crate::quadrature::GlRule;

/// The undefined `j` in the normalizing constant of `N_β`. Fixed by matching
/// `(n-1)!/j^n = 1/(4π²)` at `n = 2` and `1/(2 j^{n-1}) = 1/(8π²)` at `n = 3`.
pub const J: f64 = 2.0 * PI;

/// Normalizing constant of `N_β`: `(n-1)!/j^n` for even `n`, `1/(2 j^{n-1})` for odd `n`.
pub fn n_beta_constant(n: usize) -> f64 {
    if n % 2 == 0 {
        let fact: f64 = (1..n).map(|k| k as f64).product();
        fact / J.powi(n as i32)
    } else {
        0.5 / J.powi(n as i32 - 1)
    }
}

/// A surface family `Z(p, ω) = {x : Φ(x, p, ω) = 0}` parametrized, for fixed `x`, by `ω`.
pub trait GeneratingFamily {
    fn dim(&self) -> usize;
    fn phi(&self, x: &Point, p: f64, omega: &Direction) -> f64;
    fn grad_x_phi(&self, x: &Point, p: f64, omega: &Direction) -> Point;
    /// The `p` for which `(p, ω) ∈ Z(x)`.
    fn surface_parameter(&self, x: &Point, omega: &Direction) -> f64;
    /// Ambient `ω`-gradient of `Φ`.
    fn grad_omega_phi(&self, x: &Point, p: f64, omega: &Direction) -> Point;
}

/// Confocal paraboloids with focus at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParaboloidFamily {
    pub dim: usize,
}

impl GeneratingFamily for ParaboloidFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn phi(&self, x: &Point, p: f64, omega: &Direction) -> f64 {
        incidence(x, omega.as_point()) - p
    }

    fn grad_x_phi(&self, x: &Point, _p: f64, omega: &Direction) -> Point {
        let r = norm(x);
        let w = omega.as_point();
        std::array::from_fn(|k| 0.5 * (x[k] / r - w[k]))
    }

    fn surface_parameter(&self, x: &Point, omega: &Direction) -> f64 {
        incidence(x, omega.as_point())
    }

    fn grad_omega_phi(&self, x: &Point, _p: f64, _omega: &Direction) -> Point {
        [-0.5 * x[0], -0.5 * x[1], -0.5 * x[2]]
    }
}

/// `D_b = (1/|S^{n-1}|) ∫ |∇ₓθ|^{2-n} Ω`, reduced to polar angle `γ` about `x/|x|`.
///
/// With `|∇ₓθ| = sin(γ/2)` the integrand `sin^{n-2}γ / sin^{n-2}(γ/2)` collapses
/// to `(2 cos(γ/2))^{n-2}`, which Gauss–Legendre of `order` nodes integrates.
pub fn db_constant(n: usize, order: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    if order == 0 {
        return Err(Error::EmptyRule);
    }
    let ring = sphere_area(n - 1);
    let integral = GlRule::new(order).integrate(0.0, PI, |g| (2.0 * (0.5 * g).cos()).powi(n as i32 - 2));
    Ok(ring * integral / sphere_area(n))
}

/// `D_b` by direct quadrature of the unsimplified integrand `|∇ₓθ(x, ω)|^{2-n}` at `x`.
///
/// Spatial case: Gauss–Legendre in `γ` (angle to `x/|x|`) times `azimuth` equispaced
/// angles, so the area element `sin γ` cancels the vertex singularity exactly.
/// Planar case: `azimuth` equispaced angles of the unit circle.
pub fn db_direct(x: &Point, dim: usize, polar: usize, azimuth: usize) -> Result<f64> {
    if norm(x) == 0.0 {
        return Err(Error::ZeroPoint);
    }
    if azimuth == 0 || (dim == 3 && polar == 0) {
        return Err(Error::EmptyRule);
    }
    match dim {
        2 => {
            let dphi = 2.0 * PI / azimuth as f64;
            let sum: f64 = (0..azimuth)
                .map(|k| {
                    let w = Direction::from_angle(dphi * (k as f64 + 0.5));
                    grad_theta_norm(x, &w).map(|g| g.powi(0))
                })
                .sum::<Result<f64>>()?;
            Ok(sum * dphi / (2.0 * PI))
        }
        3 => {
            let xi = Direction::new(x)?;
            let (e1, e2) = xi.frame();
            let a = xi.as_point();
            let dphi = 2.0 * PI / azimuth as f64;
            let gl = GlRule::new(polar);
            let mut total = 0.0;
            for (t, wt) in gl.nodes().iter().zip(gl.weights()) {
                let gamma = 0.5 * PI * (t + 1.0);
                let (s, c) = gamma.sin_cos();
                let mut ring = 0.0;
                for k in 0..azimuth {
                    let (sp, cp) = (dphi * k as f64).sin_cos();
                    let w: Point = std::array::from_fn(|i| c * a[i] + s * (cp * e1[i] + sp * e2[i]));
                    ring += s / grad_theta_norm(x, &Direction::new(&w)?)?;
                }
                total += 0.5 * PI * wt * ring * dphi;
            }
            Ok(total / (4.0 * PI))
        }
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

/// Spatial rule whose polar axis is `axis`: `panels` composite Gauss–Legendre
/// panels of order 16 in `t = <ω, axis>`, times `azimuth` equispaced angles.
///
/// The `Θ` integrand is singular near the great circle `<ω, x - y> = |x| - |y|`;
/// aligning the polar axis with `x - y` makes that a polar band.
pub fn banded_rule(axis: &Direction, panels: usize, azimuth: usize) -> Result<SphereRule> {
    if axis.dim() != 3 {
        return Err(Error::UnsupportedDimension(axis.dim()));
    }
    if panels == 0 || azimuth < 2 {
        return Err(Error::EmptyRule);
    }
    let gl = GlRule::new(16);
    let (e1, e2) = axis.frame();
    let a = axis.as_point();
    let h = 2.0 / panels as f64;
    let dphi = 2.0 * PI / azimuth as f64;
    let mut nodes = Vec::with_capacity(panels * 16 * azimuth);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for i in 0..panels {
        let lo = -1.0 + h * i as f64;
        for (u, wu) in gl.nodes().iter().zip(gl.weights()) {
            let t = lo + 0.5 * h * (u + 1.0);
            let s = (1.0 - t * t).max(0.0).sqrt();
            for k in 0..azimuth {
                let (sp, cp) = (dphi * k as f64).sin_cos();
                let w: Point = std::array::from_fn(|j| t * a[j] + s * (cp * e1[j] + sp * e2[j]));
                nodes.push(Direction::new(&w)?);
                weights.push(0.5 * h * wu * dphi);
            }
        }
    }
    Ok(SphereRule { dim: 3, nodes, weights, scheme: RuleScheme::Explicit })
}

/// One evaluation of the regularized remainder kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProbeResult {
    pub x: Point,
    pub y: Point,
    pub eps: f64,
    pub eta: f64,
    /// `Re iⁿ (-1)ⁿ ∫ b_ε(y, ω) Ω / (θ(x, ω) - θ(y, ω) - iη)ⁿ`.
    pub value: f64,
    /// `min_k |θ(x, ω_k) - θ(y, ω_k)|` over the rule.
    pub min_gap: f64,
    pub nodes: usize,
}

impl ThetaProbeResult {
    pub const CSV_HEADER: &'static str = "x0,x1,x2,y0,y1,y2,eps,eta,value";

    pub fn csv_row(&self) -> String {
        let mut cells: Vec<String> = self.x.iter().chain(&self.y).map(|v| format!("{v:.16e}")).collect();
        cells.extend([self.eps, self.eta, self.value].iter().map(|v| format!("{v:.16e}")));
        cells.join(",")
    }
}

fn check_pair(x: &Point, y: &Point) -> Result<()> {
    if norm(x) == 0.0 || norm(y) == 0.0 {
        return Err(Error::ZeroPoint);
    }
    if x == y {
        return Err(Error::CoincidentPoints);
    }
    Ok(())
}

/// Integrates the `Θ` kernel over `rule` with an imaginary offset `η` in place of `-i0`.
///
/// The cutoff `b_ε` is `b = |∇θ(y, ω)|² = θ(y, ω)/|y|` outside angle `ε` of
/// `y/|y|` and zero inside.
pub fn theta_kernel_probe(x: &Point, y: &Point, eps: f64, eta: f64, rule: &SphereRule) -> Result<ThetaProbeResult> {
    check_pair(x, y)?;
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("η must be positive, got {eta}")));
    }
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!("ε must be non-negative, got {eps}")));
    }
    if rule.is_empty() {
        return Err(Error::EmptyRule);
    }
    let n = rule.dim as i32;
    let ry = norm(y);
    let cos_eps = eps.cos();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut min_gap = f64::INFINITY;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let om = node.as_point();
        let d = incidence(x, om) - incidence(y, om);
        min_gap = min_gap.min(d.abs());
        if dot(y, om) / ry > cos_eps {
            continue;
        }
        let b = incidence(y, om) / ry;
        acc += w * b / Complex64::new(d, -eta).powi(n);
    }
    // iⁿ (-1)ⁿ = (-i)ⁿ
    let value = (Complex64::new(0.0, -1.0).powi(n) * acc).re;
    Ok(ThetaProbeResult { x: *x, y: *y, eps, eta, value, min_gap, nodes: rule.len() })
}

/// Outcome of a conjugate-point search.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateReport {
    pub conjugate: bool,
    /// Smallest `|∂_ω Φ(x, ·) - ∂_ω Φ(y, ·)|` over the rule.
    pub min_gradient_gap: f64,
    /// Smallest `|Φ(x, ·) - Φ(y, ·)|` over the rule.
    pub min_value_gap: f64,
    /// Node attaining `min_value_gap`.
    pub witness: Direction,
}

/// Searches `rule` for `ω` where both `Φ` and its `ω`-gradient agree at `x` and `y`.
pub fn conjugate_check(x: &Point, y: &Point, rule: &SphereRule, tol: f64) -> Result<ConjugateReport> {
    check_pair(x, y)?;
    if rule.is_empty() {
        return Err(Error::EmptyRule);
    }
    let fam = ParaboloidFamily { dim: rule.dim };
    let mut best = (f64::INFINITY, f64::INFINITY, rule.nodes[0]);
    let mut conjugate = false;
    for node in &rule.nodes {
        let p = fam.surface_parameter(y, node);
        let value_gap = (fam.phi(x, p, node) - fam.phi(y, p, node)).abs();
        let (gx, gy) = (fam.grad_omega_phi(x, p, node), fam.grad_omega_phi(y, p, node));
        let grad_gap = norm(&std::array::from_fn(|k| gx[k] - gy[k]));
        conjugate |= value_gap < tol && grad_gap < tol;
        best.1 = best.1.min(grad_gap);
        if value_gap < best.0 {
            best.0 = value_gap;
            best.2 = *node;
        }
    }
    Ok(ConjugateReport { conjugate, min_gradient_gap: best.1, min_value_gap: best.0, witness: best.2 })
}

/// Least-squares fit of `θ(x, ω) - θ(y, ω) ≈ c₀ + <c, ω>` over the rule nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub intercept: f64,
    pub slope: Point,
    pub max_residual: f64,
    /// Extremes of the difference over the nodes.
    pub min: f64,
    pub max: f64,
}

impl AffineFit {
    pub fn changes_sign(&self) -> bool {
        self.min < 0.0 && self.max > 0.0
    }
}

pub fn affine_fit(x: &Point, y: &Point, rule: &SphereRule) -> Result<AffineFit> {
    check_pair(x, y)?;
    let n = rule.dim;
    if rule.len() < n + 1 {
        return Err(Error::EmptyRule);
    }
    let a = DMatrix::from_fn(rule.len(), n + 1, |i, j| if j == 0 { 1.0 } else { rule.nodes[i].as_point()[j - 1] });
    let d = DVector::from_iterator(
        rule.len(),
        rule.nodes.iter().map(|w| incidence(x, w.as_point()) - incidence(y, w.as_point())),
    );
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&d, 1e-14)
        .map_err(|e| Error::InvalidParameter(format!("affine fit failed: {e}")))?;
    let resid = &a * &coef - &d;
    let mut slope = [0.0; 3];
    slope[..n].copy_from_slice(&coef.as_slice()[1..]);
    Ok(AffineFit {
        intercept: coef[0],
        slope,
        max_residual: resid.amax(),
        min: d.min(),
        max: d.max(),
    })
}

/// `Φ(x, θ(x, ω), ω)` for a family; zero by construction of `Z(x)`.
pub fn surface_residual<F: GeneratingFamily>(family: &F, x: &Point, omega: &Direction) -> f64 {
    family.phi(x, family.surface_parameter(x, omega), omega)
}

/// Unit normal of the singular great circle of `θ(x, ·) - θ(y, ·)`.
pub fn singular_axis(x: &Point, y: &Point) -> Result<Direction> {
    check_pair(x, y)?;
    let d: Point = std::array::from_fn(|k| x[k] - y[k]);
    Direction::new(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_rule;

    #[test]
    fn n_beta_matches_filter_prefactors() {
        assert!((n_beta_constant(2) - 1.0 / (4.0 * PI * PI)).abs() < 1e-18);
        assert!((n_beta_constant(3) - 1.0 / (8.0 * PI * PI)).abs() < 1e-18);
    }

    #[test]
    fn db_is_power_of_two() {
        for (n, want) in [(2, 1.0), (3, 2.0), (4, 4.0), (5, 8.0)] {
            assert!((db_constant(n, 32).unwrap() - want).abs() < 1e-12, "{n}");
        }
        assert_eq!(db_constant(2, 1).unwrap(), 1.0);
        assert!(db_constant(1, 8).is_err());
    }

    #[test]
    fn direct_db_agrees() {
        let x = [0.3, -0.2, 0.5];
        assert!((db_direct(&x, 3, 40, 16).unwrap() - 2.0).abs() < 1e-10);
        assert!((db_direct(&[0.4, 0.1, 0.0], 2, 0, 12).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn surface_residual_vanishes() {
        let fam = ParaboloidFamily { dim: 3 };
        let rule = sphere_rule(3, 6, 8).unwrap();
        for w in &rule.nodes {
            assert!(surface_residual(&fam, &[0.2, -0.7, 0.4], w).abs() < 1e-12);
        }
    }

    #[test]
    fn no_conjugate_points() {
        let x = [0.1, 0.2, 0.3];
        let y = [-0.4, 0.0, 0.2];
        let rule = sphere_rule(3, 10, 20).unwrap();
        let rep = conjugate_check(&x, &y, &rule, 1e-8).unwrap();
        assert!(!rep.conjugate);
        let half = 0.5 * norm(&[0.5, 0.2, 0.1]);
        assert!((rep.min_gradient_gap - half).abs() < 1e-15);
        assert!(matches!(conjugate_check(&x, &x, &rule, 1e-8), Err(Error::CoincidentPoints)));
    }

    #[test]
    fn difference_is_affine_and_changes_sign() {
        let x = [0.3, 0.0, 0.4];
        let y = [0.0, -0.2, 0.1];
        let fit = affine_fit(&x, &y, &sphere_rule(3, 8, 12).unwrap()).unwrap();
        assert!(fit.max_residual < 1e-12 && fit.changes_sign());
        let d: Point = std::array::from_fn(|k| -0.5 * (x[k] - y[k]));
        for k in 0..3 {
            assert!((fit.slope[k] - d[k]).abs() < 1e-12);
        }
        // at ω = x/|x| the difference is (<y,x> - |x||y|)/(2|x|) < 0
        let xi = Direction::new(&x).unwrap();
        let at_xi = incidence(&x, xi.as_point()) - incidence(&y, xi.as_point());
        let want = (dot(&y, &x) - norm(&x) * norm(&y)) / (2.0 * norm(&x));
        assert!((at_xi - want).abs() < 1e-15 && at_xi < 0.0);
    }

    #[test]
    fn theta_probe_is_finite_and_validates() {
        let x = [0.0, 0.0, 0.5];
        let y = [0.0, 0.0, -0.5];
        let rule = banded_rule(&singular_axis(&x, &y).unwrap(), 64, 8).unwrap();
        assert!((rule.total_weight() - 4.0 * PI).abs() < 1e-12);
        let r = theta_kernel_probe(&x, &y, 0.1, 0.1, &rule).unwrap();
        assert!(r.value.is_finite());
        assert_eq!(r.csv_row().split(',').count(), 9);
        assert!(theta_kernel_probe(&x, &x, 0.1, 0.1, &rule).is_err());
        assert!(theta_kernel_probe(&x, &y, 0.1, 0.0, &rule).is_err());
        assert!(theta_kernel_probe(&[0.0; 3], &y, 0.1, 0.1, &rule).is_err());
    }
}
