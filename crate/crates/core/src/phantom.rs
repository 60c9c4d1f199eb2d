//! Compactly supported test functions built from radial bumps.
//!
//! A spec file is TOML, one `[[component]]` table per bump:
//!
//! ```toml
//! dim = 3
//!
//! [[component]]
//! kind = "polybump"          # or "gaussian"
//! center = [0.0, 0.0, 0.0]
//! radius = 1.0               # support radius a
//! amplitude = 1.0
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComponentKind {
    /// `A (1 - (d/a)²)³` inside the ball, zero outside. C² across the boundary.
    Polybump,
    /// Gaussian with `σ = a/6`, tapered to zero over `5σ ≤ d ≤ 6σ`.
    #[serde(alias = "gaussian-truncated")]
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub center: Vec<f64>,
    pub radius: f64,
    pub amplitude: f64,
}

impl Component {
    pub fn polybump(center: &[f64], radius: f64, amplitude: f64) -> Self {
        Self { kind: ComponentKind::Polybump, center: center.to_vec(), radius, amplitude }
    }

    pub fn gaussian(center: &[f64], support: f64, amplitude: f64) -> Self {
        Self { kind: ComponentKind::Gaussian, center: center.to_vec(), radius: support, amplitude }
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for (dst, src) in c.iter_mut().zip(&self.center) {
            *dst = *src;
        }
        c
    }

    /// Value as a function of squared distance from the center.
    #[inline]
    pub fn profile_sq(&self, d2: f64) -> f64 {
        let a2 = self.radius * self.radius;
        if d2 >= a2 {
            return 0.0;
        }
        match self.kind {
            ComponentKind::Polybump => {
                let u = 1.0 - d2 / a2;
                self.amplitude * u * u * u
            }
            ComponentKind::Gaussian => {
                let sigma = self.radius / 6.0;
                let g = (-0.5 * d2 / (sigma * sigma)).exp();
                let d = d2.sqrt();
                let t = (d - 5.0 * sigma) / sigma;
                let taper = if t <= 0.0 {
                    1.0
                } else {
                    // 1 - smootherstep: C² down to zero at d = 6σ
                    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
                };
                self.amplitude * g * taper
            }
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let c = self.center();
        let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2);
        self.profile_sq(d2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub dim: usize,
    #[serde(rename = "component", default)]
    pub components: Vec<Component>,
}

impl PhantomSpec {
    pub fn new(dim: usize, components: Vec<Component>) -> Result<Self> {
        let spec = Self { dim, components };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit polybump centered at the origin.
    pub fn centered_polybump(dim: usize) -> Self {
        Self { dim, components: vec![Component::polybump(&vec![0.0; dim], 1.0, 1.0)] }
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, components: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dim) {
            return Err(Error::UnsupportedDimension(self.dim));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.center.len() != self.dim {
                return Err(Error::PhantomSpec(format!(
                    "component {i}: center has {} coordinates, expected {}",
                    c.center.len(),
                    self.dim
                )));
            }
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                return Err(Error::PhantomSpec(format!("component {i}: radius must be positive")));
            }
            if !c.amplitude.is_finite() || c.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::PhantomSpec(format!("component {i}: non-finite value")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &Point) -> f64 {
        self.components.iter().map(|c| c.eval(x)).sum()
    }

    /// Radius of the smallest origin-centered ball containing the support.
    pub fn support_radius(&self) -> f64 {
        self.components
            .iter()
            .map(|c| norm(&c.center()) + c.radius)
            .fold(0.0, f64::max)
    }

    /// Axis-aligned box `(lo, hi)` containing the support.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for (i, c) in self.components.iter().enumerate() {
            let ctr = c.center();
            for k in 0..self.dim {
                let (a, b) = (ctr[k] - c.radius, ctr[k] + c.radius);
                if i == 0 || a < lo[k] {
                    lo[k] = a;
                }
                if i == 0 || b > hi[k] {
                    hi[k] = b;
                }
            }
        }
        (lo, hi)
    }

    /// `f(x / λ)`: centers and radii scaled by `λ`.
    pub fn dilated(&self, lambda: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Component {
                center: c.center.iter().map(|v| v * lambda).collect(),
                radius: c.radius * lambda,
                ..c.clone()
            })
            .collect();
        Self { dim: self.dim, components }
    }

    /// Components scaled in amplitude by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Component { amplitude: c.amplitude * alpha, ..c.clone() })
            .collect();
        Self { dim: self.dim, components }
    }

    /// Sum of two phantoms (component concatenation).
    pub fn plus(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Self { dim: self.dim, components }
    }

    /// Every center mapped through the linear map `m` (row-major 3×3).
    pub fn transformed(&self, m: &[[f64; 3]; 3]) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| {
                let x = c.center();
                let y: Vec<f64> = (0..self.dim)
                    .map(|i| m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2])
                    .collect();
                Component { center: y, ..c.clone() }
            })
            .collect();
        Self { dim: self.dim, components }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::PhantomSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("phantom spec serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_polybump_values() {
        let s = PhantomSpec::centered_polybump(3);
        assert_eq!(s.eval(&[0.0; 3]), 1.0);
        assert_eq!(s.eval(&[1.0, 0.0, 0.0]), 0.0);
        assert!((s.eval(&[0.0, 0.5, 0.0]) - 0.421875).abs() < 1e-15);
    }

    #[test]
    fn support_radius_examples() {
        assert_eq!(PhantomSpec::centered_polybump(3).support_radius(), 1.0);
        let two = PhantomSpec::new(
            3,
            vec![
                Component::polybump(&[0.3, 0.0, 0.0], 0.2, 1.0),
                Component::polybump(&[0.0; 3], 1.0, 1.0),
            ],
        )
        .unwrap();
        assert!((two.support_radius() - 1.0).abs() < 1e-15);
        assert_eq!(PhantomSpec::empty(2).support_radius(), 0.0);
    }

    #[test]
    fn gaussian_is_tapered_to_zero() {
        let c = Component::gaussian(&[0.0; 3], 1.2, 2.0);
        let sigma = 0.2;
        assert_eq!(c.profile_sq(0.0), 2.0);
        let d = 4.9 * sigma;
        assert!((c.profile_sq(d * d) - 2.0 * (-0.5f64 * 4.9 * 4.9).exp()).abs() < 1e-15);
        assert!(c.profile_sq((5.99 * sigma).powi(2)) < 1e-9);
        assert_eq!(c.profile_sq((6.0 * sigma).powi(2)), 0.0);
    }

    #[test]
    fn polybump_is_c2_at_boundary() {
        let c = Component::polybump(&[0.0; 3], 1.0, 1.0);
        let h = 1e-4;
        let f = |d: f64| c.profile_sq(d * d);
        let second = (f(1.0 - h) - 2.0 * f(1.0) + f(1.0 + h)) / (h * h);
        assert!(second.abs() < 1e-3);
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let spec = PhantomSpec::new(
            2,
            vec![
                Component::polybump(&[0.1, -0.2], 0.5, 1.5),
                Component::gaussian(&[0.0, 0.3], 0.3, -0.5),
            ],
        )
        .unwrap();
        let text = spec.to_toml_string();
        assert!(text.contains("[[component]]"));
        assert_eq!(PhantomSpec::from_toml_str(&text).unwrap(), spec);

        let bad = "dim = 3\n[[component]]\nkind = \"polybump\"\ncenter = [0.0, 0.0]\nradius = 1.0\namplitude = 1.0\n";
        assert!(matches!(PhantomSpec::from_toml_str(bad), Err(Error::PhantomSpec(_))));
        let neg = "dim = 3\n[[component]]\nkind = \"gaussian\"\ncenter = [0.0, 0.0, 0.0]\nradius = -1.0\namplitude = 1.0\n";
        assert!(PhantomSpec::from_toml_str(neg).is_err());
    }

    #[test]
    fn bounding_box_covers_components() {
        let spec = PhantomSpec::new(
            3,
            vec![
                Component::polybump(&[0.5, 0.0, 0.0], 0.2, 1.0),
                Component::polybump(&[0.0, -0.4, 0.1], 0.3, 1.0),
            ],
        )
        .unwrap();
        let (lo, hi) = spec.bounding_box();
        assert_eq!(lo, [0.0 - 0.3, -0.7, -0.2]);
        assert!((hi[0] - 0.7).abs() < 1e-15 && (hi[1] - 0.2).abs() < 1e-15 && (hi[2] - 0.4).abs() < 1e-15);
    }
}

#[cfg(test)]
mod properties {
    use std::f64::consts::{PI, TAU};

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::Direction;

    fn direction3() -> impl Strategy<Value = Direction> {
        (-1.0..1.0f64, 0.0..2.0 * PI).prop_map(|(c, a)| Direction::from_spherical(c, a))
    }

    #[test]
    fn vanishes_at_ten_thousand_exterior_points() {
        let spec = PhantomSpec::new(
            3,
            vec![
                Component::polybump(&[0.3, 0.0, 0.0], 0.2, 1.0),
                Component::polybump(&[0.0, 0.0, 0.0], 1.0, 2.0),
                Component::gaussian(&[-0.2, 0.4, 0.1], 0.3, 0.5),
            ],
        )
        .unwrap();
        assert!((spec.support_radius() - 1.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10_000 {
            let w = Direction::from_spherical(rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU));
            let r = spec.support_radius() * (1.0 + 1e-12) + rng.random_range(0.0..4.0);
            assert_eq!(spec.eval(&w.as_point().map(|v| v * r)), 0.0);
        }
    }

    proptest! {
        #[test]
        fn centered_bump_depends_only_on_radius(a in direction3(), b in direction3(), r in 0.0..1.2f64) {
            let spec = PhantomSpec::centered_polybump(3);
            let fa = spec.eval(&a.as_point().map(|v| v * r));
            let fb = spec.eval(&b.as_point().map(|v| v * r));
            prop_assert!((fa - fb).abs() <= 1e-12);
        }
    }
}
