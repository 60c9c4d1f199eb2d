//! Confocal paraboloid geometry.
//!
//! The family is `|x| - <x, ω> = 2p`: every surface has its focus at the
//! origin, axis `ω` and focal parameter `p`. Points live in a fixed
//! three-slot array; planar problems leave the third slot at zero.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::GlRule;

pub type Point = [f64; 3];

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Total measure of the unit sphere `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    // |S^0| = 2, |S^1| = 2π, |S^k| = 2π/(k-1) |S^{k-2}|
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

/// Unit vector in the plane or in space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    v: Point,
    dim: usize,
}

impl Direction {
    /// Normalizes `components` (length 2 or 3).
    pub fn new(components: &[f64]) -> Result<Self> {
        let dim = components.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut v = [0.0; 3];
        v[..dim].copy_from_slice(components);
        let len = norm(&v);
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidParameter("direction must be a nonzero finite vector".into()));
        }
        Ok(Self { v: [v[0] / len, v[1] / len, v[2] / len], dim })
    }

    /// Stores `components` verbatim; they must already have unit length to
    /// within `1e-12`. Used when reading rules back from disk.
    pub fn from_unit_components(components: &[f64]) -> Result<Self> {
        let dim = components.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut v = [0.0; 3];
        v[..dim].copy_from_slice(components);
        if !((norm(&v) - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!("direction {components:?} is not a unit vector")));
        }
        Ok(Self { v, dim })
    }

    /// Planar direction at polar angle `angle`.
    pub fn from_angle(angle: f64) -> Self {
        Self { v: [angle.cos(), angle.sin(), 0.0], dim: 2 }
    }

    /// Spatial direction from polar cosine and azimuth.
    pub fn from_spherical(cos_polar: f64, azimuth: f64) -> Self {
        let sin_polar = (1.0 - cos_polar * cos_polar).max(0.0).sqrt();
        Self {
            v: [sin_polar * azimuth.cos(), sin_polar * azimuth.sin(), cos_polar],
            dim: 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_point(&self) -> &Point {
        &self.v
    }

    pub fn components(&self) -> &[f64] {
        &self.v[..self.dim]
    }

    pub fn flipped(&self) -> Self {
        Self { v: [-self.v[0], -self.v[1], -self.v[2]], dim: self.dim }
    }

    /// Planar normal obtained by a quarter turn (2D only meaningful).
    pub fn perp(&self) -> Point {
        [-self.v[1], self.v[0], 0.0]
    }

    /// Deterministic orthonormal frame `(e1, e2)` with `(e1, e2, ω)` right-handed.
    ///
    /// `e1` is Gram–Schmidt of the coordinate axis least aligned with `ω`
    /// (lowest index wins ties).
    pub fn frame(&self) -> (Point, Point) {
        let w = &self.v;
        let mut axis = 0;
        for k in 1..3 {
            if w[k].abs() < w[axis].abs() {
                axis = k;
            }
        }
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let c = w[axis];
        let mut e1 = [e[0] - c * w[0], e[1] - c * w[1], e[2] - c * w[2]];
        let len = norm(&e1);
        e1.iter_mut().for_each(|x| *x /= len);
        let e2 = cross(w, &e1);
        (e1, e2)
    }
}

/// Incidence function `(|x| - <x, ω>) / 2` without the origin check.
#[inline(always)]
pub fn incidence(x: &Point, omega: &Point) -> f64 {
    0.5 * (norm(x) - dot(x, omega))
}

/// Focal parameter of the paraboloid with axis `ω` through `x`.
pub fn theta(x: &Point, omega: &Direction) -> Result<f64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::ZeroPoint);
    }
    Ok((0.5 * (r - dot(x, omega.as_point()))).clamp(0.0, r))
}

/// `|∇ₓθ| = sqrt(θ / |x|) = sin(γ/2)`.
pub fn grad_theta_norm(x: &Point, omega: &Direction) -> Result<f64> {
    let t = theta(x, omega)?;
    Ok((t / norm(x)).sqrt())
}

/// `∇ₓθ = (x/|x| - ω) / 2`.
pub fn grad_theta(x: &Point, omega: &Direction) -> Result<Point> {
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::ZeroPoint);
    }
    let w = omega.as_point();
    Ok([
        0.5 * (x[0] / r - w[0]),
        0.5 * (x[1] / r - w[1]),
        0.5 * (x[2] / r - w[2]),
    ])
}

/// Which half of a planar parabola a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Intrinsic coordinates of a point on `Z(p, ω)`.
#[derive(Debug, Clone, Copy)]
pub struct ParaboloidCoords {
    pub p: f64,
    pub axis: Direction,
    pub r: f64,
    /// Azimuth about the axis, spatial case only.
    pub azimuth: f64,
    /// Planar case only.
    pub branch: Branch,
}

/// `cos γ = 1 - 2p/r`, clamped against rounding at the vertex.
pub fn cos_gamma(p: f64, r: f64) -> f64 {
    let c = 1.0 - 2.0 * p / r;
    if c < -1.0 - 1e-12 || c > 1.0 + 1e-12 {
        c
    } else {
        c.clamp(-1.0, 1.0)
    }
}

/// Maps paraboloid coordinates to the Cartesian point.
pub fn paraboloid_point(c: &ParaboloidCoords) -> Result<Point> {
    if !(c.p > 0.0) {
        return Err(Error::NonPositiveP(c.p));
    }
    if !(c.r >= c.p) {
        return Err(Error::InvalidCoords { r: c.r, p: c.p });
    }
    let cg = cos_gamma(c.p, c.r);
    let sg = (1.0 - cg * cg).max(0.0).sqrt();
    let w = c.axis.as_point();
    let x = match c.axis.dim() {
        2 => {
            let perp = c.axis.perp();
            let s = c.branch.sign() * sg;
            [
                c.r * (cg * w[0] + s * perp[0]),
                c.r * (cg * w[1] + s * perp[1]),
                0.0,
            ]
        }
        _ => {
            let (e1, e2) = c.axis.frame();
            let (sp, cp) = c.azimuth.sin_cos();
            let mut x = [0.0; 3];
            for k in 0..3 {
                x[k] = c.r * (cg * w[k] + sg * (cp * e1[k] + sp * e2[k]));
            }
            x
        }
    };
    Ok(x)
}

/// How the nodes of a [`SphereRule`] were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleScheme {
    /// `m` equispaced planar angles.
    Uniform { m: usize },
    /// Gauss–Legendre in the polar cosine times `m` equispaced azimuths.
    GaussAzimuth { l: usize, m: usize },
    /// Nodes read from a file or built by hand.
    Explicit,
}

impl RuleScheme {
    pub fn id(&self) -> u32 {
        match self {
            RuleScheme::Uniform { .. } => 0,
            RuleScheme::GaussAzimuth { .. } => 1,
            RuleScheme::Explicit => u32::MAX,
        }
    }

    pub fn params(&self) -> (u32, u32) {
        match *self {
            RuleScheme::Uniform { m } => (0, m as u32),
            RuleScheme::GaussAzimuth { l, m } => (l as u32, m as u32),
            RuleScheme::Explicit => (0, 0),
        }
    }
}

/// Quadrature rule for the area form on `S^{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub scheme: RuleScheme,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&Direction) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(d, w)| w * f(d)).sum()
    }

    /// Every node replaced by its antipode.
    pub fn flipped(&self) -> Self {
        Self {
            dim: self.dim,
            nodes: self.nodes.iter().map(Direction::flipped).collect(),
            weights: self.weights.clone(),
            scheme: self.scheme,
        }
    }
}

/// Product rule on `S^1` (`n = 2`) or `S^2` (`n = 3`).
///
/// Planar rules place `m` angles at `2π(k + 1/2)/m`, so no node sits on a
/// coordinate axis. Spatial rules take `l` Gauss–Legendre nodes in the polar
/// cosine and `m` azimuths `2πj/m`; nodes are stored polar-major.
pub fn sphere_rule(n: usize, l: usize, m: usize) -> Result<SphereRule> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("azimuth count {m} < 2")));
    }
    match n {
        2 => {
            let w = 2.0 * PI / m as f64;
            let nodes = (0..m)
                .map(|k| Direction::from_angle(2.0 * PI * (k as f64 + 0.5) / m as f64))
                .collect();
            Ok(SphereRule { dim: 2, nodes, weights: vec![w; m], scheme: RuleScheme::Uniform { m } })
        }
        3 => {
            if l < 2 {
                return Err(Error::InvalidParameter(format!("polar order {l} < 2")));
            }
            let gl = GlRule::new(l);
            let dphi = 2.0 * PI / m as f64;
            let mut nodes = Vec::with_capacity(l * m);
            let mut weights = Vec::with_capacity(l * m);
            for (mu, wg) in gl.nodes().iter().zip(gl.weights()) {
                for j in 0..m {
                    nodes.push(Direction::from_spherical(*mu, dphi * j as f64));
                    weights.push(wg * dphi);
                }
            }
            Ok(SphereRule { dim: 3, nodes, weights, scheme: RuleScheme::GaussAzimuth { l, m } })
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}


#[cfg(test)]
mod properties {
    use proptest::prelude::*;

    use super::*;

    fn point3() -> impl Strategy<Value = Point> {
        prop::array::uniform3(-2.0..2.0f64).prop_filter("away from the focus", |x| norm(x) > 1e-3)
    }

    fn direction3() -> impl Strategy<Value = Direction> {
        (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(c, a)| Direction::from_spherical(c, a))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn theta_range_and_gradient_identity(x in point3(), w in direction3()) {
            let r = norm(&x);
            let t = theta(&x, &w).unwrap();
            prop_assert!((0.0..=r).contains(&t));
            let g = grad_theta_norm(&x, &w).unwrap();
            prop_assert!((g * g * r - t).abs() <= 1e-12 * r.max(1.0));
            let axis = Direction::new(&x).unwrap();
            prop_assert!(theta(&x, &axis).unwrap() <= 1e-15 * r);
            prop_assert!((theta(&x, &axis.flipped()).unwrap() - r).abs() <= 1e-15 * r);
        }

        #[test]
        fn theta_is_homogeneous(x in point3(), w in direction3(), lambda in 0.1..10.0f64) {
            let y = x.map(|v| lambda * v);
            let lhs = theta(&y, &w).unwrap();
            prop_assert!((lhs - lambda * theta(&x, &w).unwrap()).abs() <= 1e-12 * lhs.max(1.0));
        }
    }

    fn double_factorial(k: i64) -> f64 {
        (1..=k).rev().step_by(2).map(|v| v as f64).product()
    }

    /// `∫_{S²} x^a y^b z^c`.
    fn monomial_moment(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let df = |k: u32| double_factorial(k as i64 - 1);
        4.0 * PI * df(a) * df(b) * df(c) / double_factorial((a + b + c + 1) as i64)
    }

    #[test]
    fn sphere_rule_exact_for_low_degree_polynomials() {
        for (l, m) in [(3, 6), (4, 8), (6, 9)] {
            let rule = sphere_rule(3, l, m).unwrap();
            let deg = (2 * l - 1).min(m - 1) as u32;
            for a in 0..=deg {
                for b in 0..=deg - a {
                    for c in 0..=deg - a - b {
                        let got = rule.integrate(|w| {
                            let v = w.as_point();
                            v[0].powi(a as i32) * v[1].powi(b as i32) * v[2].powi(c as i32)
                        });
                        let want = monomial_moment(a, b, c);
                        assert!((got - want).abs() <= 1e-10, "L={l} M={m} x^{a} y^{b} z^{c}: {got} vs {want}");
                    }
                }
            }
        }
    }

    #[test]
    fn verbatim_directions_round_trip() {
        let d = Direction::from_spherical(0.3, 1.1);
        assert_eq!(Direction::from_unit_components(d.components()).unwrap(), d);
        assert!(Direction::from_unit_components(&[1.0, 1.0]).is_err());
    }
}
