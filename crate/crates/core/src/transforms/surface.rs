//! Surface integrals `∫_{Z(p,ω)} |x|^k f dS` for bump phantoms.
//!
//! The radial coordinate is reparametrized as `r = p + s²`, which removes the
//! `sqrt(r - p)` behaviour at the vertex. For a component centered at `c`
//! the squared distance from a surface point to `c` is
//!
//! ```text
//! d² = α(s) - β(s) cos ψ,   α = r² + |c|² - 2(r - 2p)<c,ω>,   β = 4|c⊥| sqrt(p) s
//! ```
//!
//! with `ψ` the azimuth measured from the projection of `c`. The azimuthal
//! integral therefore never depends on the frame chosen around `ω`. It is
//! exact for polybumps and Gauss–Legendre over the covered arc for Gaussians.
//! Radial breakpoints sit where the circle at fixed `s` enters, or fully
//! enters, the component support.

use std::f64::consts::PI;

use crate::geometry::{dot, Direction};
use crate::phantom::{Component, ComponentKind, PhantomSpec};
use crate::quadrature::GlRule;

use super::QuadParams;

/// Reusable quadrature state for surface integrals.
#[derive(Debug, Clone)]
pub struct SurfaceIntegrator {
    params: QuadParams,
    radial: GlRule,
    arc: GlRule,
}

const ROOT_SAMPLES: usize = 32;

impl SurfaceIntegrator {
    pub fn new(params: QuadParams) -> Self {
        Self {
            radial: GlRule::new(params.radial_order),
            arc: GlRule::new(params.azimuth_nodes),
            params,
        }
    }

    pub fn params(&self) -> &QuadParams {
        &self.params
    }

    /// `∫_{Z(p,ω)} |x|^k f dS` with the Euclidean surface measure.
    pub fn weighted(&self, spec: &PhantomSpec, p: f64, omega: &Direction, k: f64) -> f64 {
        spec.components
            .iter()
            .map(|c| match spec.dim {
                2 => self.component_planar(c, p, omega, k),
                _ => self.component_spatial(c, p, omega, k),
            })
            .sum()
    }

    fn component_spatial(&self, comp: &Component, p: f64, omega: &Direction, k: f64) -> f64 {
        let c = comp.center();
        let cw = dot(&c, omega.as_point());
        let c2 = dot(&c, &c);
        let c_perp = (c2 - cw * cw).max(0.0).sqrt();
        let a2 = comp.radius * comp.radius;
        let Some((s_lo, s_hi)) = s_range(p, c2.sqrt(), comp.radius) else {
            return 0.0;
        };
        let sqrt_p = p.sqrt();
        let alpha = |s: f64| {
            let r = p + s * s;
            r * r + c2 - 2.0 * (r - 2.0 * p) * cw
        };
        let beta = |s: f64| 4.0 * c_perp * sqrt_p * s;

        let mut cuts = Vec::new();
        if c_perp > 0.0 {
            find_roots(|s| alpha(s) + beta(s) - a2, s_lo, s_hi, &mut cuts);
            find_roots(|s| alpha(s) - beta(s) - a2, s_lo, s_hi, &mut cuts);
        } else {
            find_roots(|s| alpha(s) - a2, s_lo, s_hi, &mut cuts);
        }

        let integrand = |s: f64| {
            let r = p + s * s;
            let ring = self.ring_integral(comp, alpha(s), beta(s));
            if ring == 0.0 {
                return 0.0;
            }
            // dS = 2 sqrt(p r) dr dφ, dr = 2s ds
            4.0 * (p * r).sqrt() * s * r.powf(k) * ring
        };
        self.integrate_pieces(integrand, s_lo, s_hi, &mut cuts)
    }

    fn component_planar(&self, comp: &Component, p: f64, omega: &Direction, k: f64) -> f64 {
        let c = comp.center();
        let cw = dot(&c, omega.as_point());
        let c2 = dot(&c, &c);
        let c_perp = dot(&c, &omega.perp());
        let a2 = comp.radius * comp.radius;
        let Some((s_lo, s_hi)) = s_range(p, c2.sqrt(), comp.radius) else {
            return 0.0;
        };
        let sqrt_p = p.sqrt();
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let d2 = |s: f64| {
                let r = p + s * s;
                r * r + c2 - 2.0 * (r - 2.0 * p) * cw - sign * 4.0 * sqrt_p * s * c_perp
            };
            let mut cuts = Vec::new();
            find_roots(|s| d2(s) - a2, s_lo, s_hi, &mut cuts);
            // dS = sqrt(r / (r - p)) dr = 2 sqrt(r) ds
            let integrand = |s: f64| {
                let r = p + s * s;
                let v = comp.profile_sq(d2(s));
                if v == 0.0 {
                    0.0
                } else {
                    2.0 * r.sqrt() * r.powf(k) * v
                }
            };
            total += self.integrate_pieces(integrand, s_lo, s_hi, &mut cuts);
        }
        total
    }

    fn integrate_pieces<F: Fn(f64) -> f64>(
        &self,
        f: F,
        lo: f64,
        hi: f64,
        cuts: &mut Vec<f64>,
    ) -> f64 {
        cuts.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        let mut a = lo;
        for &b in cuts.iter().chain(std::iter::once(&hi)) {
            if b > a {
                acc += self.radial.integrate_composite(a, b, self.params.radial_panels, &f);
                a = b;
            }
        }
        acc
    }

    /// `∫_0^{2π} profile(α - β cos ψ) dψ`.
    fn ring_integral(&self, comp: &Component, alpha: f64, beta: f64) -> f64 {
        let a2 = comp.radius * comp.radius;
        if alpha - beta >= a2 {
            return 0.0;
        }
        match comp.kind {
            ComponentKind::Polybump => {
                // (u + v cos ψ)³ on the arc where it is positive
                let u = 1.0 - alpha / a2;
                let v = beta / a2;
                let full = u >= v;
                let value = if full {
                    2.0 * PI * (u * u * u + 1.5 * u * v * v)
                } else {
                    let c = (-u / v).clamp(-1.0, 1.0).acos();
                    let (sc, cc) = c.sin_cos();
                    let s2c = 2.0 * sc * cc;
                    2.0 * (u * u * u * c
                        + 3.0 * u * u * v * sc
                        + 3.0 * u * v * v * (0.5 * c + 0.25 * s2c)
                        + v * v * v * (sc - sc * sc * sc / 3.0))
                };
                comp.amplitude * value
            }
            ComponentKind::Gaussian => {
                if beta == 0.0 {
                    return 2.0 * PI * comp.profile_sq(alpha);
                }
                let half_arc = if alpha + beta <= a2 {
                    PI
                } else {
                    ((alpha - a2) / beta).clamp(-1.0, 1.0).acos()
                };
                2.0 * self.arc.integrate(0.0, half_arc, |psi| comp.profile_sq(alpha - beta * psi.cos()))
            }
        }
    }
}

/// Range of `s = sqrt(r - p)` over which the shell `| |x| - |c| | ≤ a` is met.
fn s_range(p: f64, center_norm: f64, radius: f64) -> Option<(f64, f64)> {
    let r_hi = center_norm + radius;
    if r_hi <= p {
        return None;
    }
    let r_lo = (center_norm - radius).max(p);
    Some(((r_lo - p).sqrt(), (r_hi - p).sqrt()))
}

/// Sign changes of `g` on a uniform sample of `(lo, hi)`, refined by bisection.
fn find_roots<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let h = (hi - lo) / ROOT_SAMPLES as f64;
    let mut x0 = lo;
    let mut g0 = g(lo);
    for i in 1..=ROOT_SAMPLES {
        let x1 = if i == ROOT_SAMPLES { hi } else { lo + h * i as f64 };
        let g1 = g(x1);
        if g1 == 0.0 && x1 < hi {
            out.push(x1);
        } else if (g0 < 0.0 && g1 > 0.0) || (g0 > 0.0 && g1 < 0.0) {
            let (mut a, mut b, mut ga) = (x0, x1, g0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = g(m);
                if (gm < 0.0) == (ga < 0.0) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            if root > lo && root < hi {
                out.push(root);
            }
        }
        x0 = x1;
        g0 = g1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_quadratic() {
        let mut out = Vec::new();
        find_roots(|x| (x - 0.25) * (x - 0.8), 0.0, 1.0, &mut out);
        assert_eq!(out.len(), 2);
        assert!((out[0] - 0.25).abs() < 1e-15 && (out[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn polybump_ring_matches_numeric_arc() {
        let comp = Component::polybump(&[0.0; 3], 1.0, 1.3);
        let integ = SurfaceIntegrator::new(QuadParams::default());
        let dense = GlRule::new(64);
        for &(alpha, beta) in &[(0.2, 0.1), (0.5, 0.6), (0.9, 0.3), (0.05, 0.0), (1.2, 0.1)] {
            let closed = integ.ring_integral(&comp, alpha, beta);
            // Brute force over the positive arc, located independently.
            let brute = if alpha + beta <= 1.0 {
                dense.integrate_composite(0.0, 2.0 * PI, 16, |psi| comp.profile_sq(alpha - beta * psi.cos()))
            } else if alpha - beta >= 1.0 {
                0.0
            } else {
                let c = ((alpha - 1.0) / beta).acos();
                2.0 * dense.integrate_composite(0.0, c, 8, |psi| comp.profile_sq(alpha - beta * psi.cos()))
            };
            assert!((closed - brute).abs() < 1e-13, "{alpha} {beta}: {closed} vs {brute}");
        }
    }
}
