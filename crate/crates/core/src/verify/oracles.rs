//! Independent one-dimensional oracles for radial phantoms.
//!
//! None of these touch the surface integrator, the filters or the
//! back-projector. Everything reduces to nested adaptive quadrature of the
//! radial profile `f` and its derivative.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{grad_theta, norm, paraboloid_point, Branch, Direction, ParaboloidCoords, Point};
use crate::inversion::{DataKind, FilterKind, Interpolation, ProfileInterpolator};
use crate::phantom::PhantomSpec;
use crate::quadrature::{integrate_adaptive, GlRule};

const ABS: f64 = 1e-15;
const REL: f64 = 1e-13;

/// Radial phantom `f(|x|)` supported in `|x| ≤ support`, with derivative.
pub struct Radial<F, D> {
    pub f: F,
    pub df: D,
    pub support: f64,
}

/// Unit-amplitude polybump `(1 - r²)³` on the unit ball.
pub fn polybump() -> Radial<fn(f64) -> f64, fn(f64) -> f64> {
    fn f(u: f64) -> f64 {
        if u < 1.0 {
            (1.0 - u * u).powi(3)
        } else {
            0.0
        }
    }
    fn df(u: f64) -> f64 {
        if u < 1.0 {
            -6.0 * u * (1.0 - u * u).powi(2)
        } else {
            0.0
        }
    }
    Radial { f, df, support: 1.0 }
}

fn adaptive<G: FnMut(f64) -> f64>(g: G, a: f64, b: f64, cuts: &[f64]) -> f64 {
    integrate_adaptive(g, a, b, cuts, ABS, REL).value
}

/// Closed forms for the centered spatial polybump.
pub mod closed_form {
    use super::PI;

    fn antideriv_r(u: f64) -> f64 {
        2.0 / 3.0 * u.powf(1.5) - 6.0 / 7.0 * u.powf(3.5) + 6.0 / 11.0 * u.powf(5.5) - 2.0 / 15.0 * u.powf(7.5)
    }

    fn antideriv_f(u: f64) -> f64 {
        u - u.powi(3) + 0.6 * u.powi(5) - u.powi(7) / 7.0
    }

    /// `R f(p) = 4π √p ∫_p^1 √u (1-u²)³ du`.
    pub fn rf(p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        4.0 * PI * p.sqrt() * (antideriv_r(1.0) - antideriv_r(p))
    }

    /// `M f(p) = (π/2)(1 - p²)⁴`.
    pub fn mf(p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        0.5 * PI * (1.0 - p * p).powi(4)
    }

    /// `M_b f(p) = 4π p ∫_p^1 (1-u²)³ du`.
    pub fn mbf(p: f64) -> f64 {
        if p >= 1.0 {
            return 0.0;
        }
        4.0 * PI * p * (antideriv_f(1.0) - antideriv_f(p))
    }

    /// What the spatial Palamodov formula returns on M data: `(1/(4r²))[1 - (1-r²)³(1-9r²)]`.
    pub fn palamodov3d_m(r: f64) -> f64 {
        (1.0 - (1.0 - r * r).powi(3) * (1.0 - 9.0 * r * r)) / (4.0 * r * r)
    }
}

/// `4π ∫_0^1 g(rt) dt` (spatial) or `2 ∫_0^1 g(rt) (t(1-t))^{-1/2} dt` (planar):
/// the sphere integral of `g(θ(x, ω))` at `|x| = r`.
pub fn radial_reduction<G: Fn(f64) -> f64>(g: G, r: f64, n: usize, breakpoints: &[f64]) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    match n {
        3 => {
            let cuts: Vec<f64> = breakpoints.iter().map(|p| p / r).collect();
            Ok(4.0 * PI * adaptive(|t| g(r * t), 0.0, 1.0, &cuts))
        }
        2 => {
            // t = sin²ψ removes the endpoint singularities
            let cuts: Vec<f64> = breakpoints.iter().filter(|p| **p < r).map(|p| (p / r).sqrt().asin()).collect();
            Ok(4.0 * adaptive(|psi| g(r * psi.sin().powi(2)), 0.0, 0.5 * PI, &cuts))
        }
        _ => Err(Error::UnsupportedDimension(n)),
    }
}

/// [`radial_reduction`] of a sampled profile, interpolated as the back-projector does,
/// with the nodes as breakpoints.
pub fn radial_reduction_profile(values: &[f64], dp: f64, r: f64, n: usize, mode: Interpolation) -> Result<f64> {
    let it = ProfileInterpolator::new(values, dp, mode);
    let nodes: Vec<f64> = (0..values.len()).map(|j| (j as f64 + 0.5) * dp).filter(|p| *p < r).collect();
    radial_reduction(|p| it.eval(p), r, n, &nodes)
}

/// Spatial radial `R f(p) = 4π √p ∫_p^a √u f(u) du`.
pub fn radial_rf3<F: Fn(f64) -> f64, D>(ph: &Radial<F, D>, p: f64) -> f64 {
    if p >= ph.support {
        return 0.0;
    }
    4.0 * PI * p.sqrt() * adaptive(|u| u.sqrt() * (ph.f)(u), p, ph.support, &[])
}

/// Spatial radial `M f(p) = 4π ∫_p^a u f(u) du`.
pub fn radial_mf3<F: Fn(f64) -> f64, D>(ph: &Radial<F, D>, p: f64) -> f64 {
    if p >= ph.support {
        return 0.0;
    }
    4.0 * PI * adaptive(|u| u * (ph.f)(u), p, ph.support, &[])
}

/// The exactly filtered profile each spatial kind produces from exact radial data.
pub fn filtered_radial3<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(ph: &Radial<F, D>, kind: FilterKind, p: f64) -> f64 {
    let (f, df) = ((ph.f)(p), (ph.df)(p));
    let s = p.sqrt();
    match kind {
        // ∂_p(p ∂_p(4π ∫_p^a √u f)) = -4π ((3/2)√p f + p^{3/2} f')
        FilterKind::Cormack3d => -4.0 * PI * (1.5 * s * f + p * s * df),
        // (4π p ∫_p^a √u f)'' = -4π ((5/2)√p f + p^{3/2} f')
        FilterKind::Palamodov3d(DataKind::R) => -4.0 * PI * (2.5 * s * f + p * s * df),
        // (4π p ∫_p^a u f)'' = -4π (3p f + p² f')
        FilterKind::Palamodov3d(DataKind::M) => -4.0 * PI * (3.0 * p * f + p * p * df),
        FilterKind::Palamodov2d(_) => f64::NAN,
    }
}

/// Spatial reconstruction value at radius `r` predicted by exact filtering and radial reduction.
pub fn predicted_radial3<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(ph: &Radial<F, D>, kind: FilterKind, r: f64) -> Result<f64> {
    if kind.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: kind.dim() });
    }
    let cut = [ph.support];
    Ok(kind.prefactor(r) * radial_reduction(|p| filtered_radial3(ph, kind, p), r, 3, &cut)?)
}

/// Planar reconstruction value at radius `r` from exact radial data: the
/// principal value is evaluated in `q = √p` by singularity subtraction and
/// the direction sum by [`radial_reduction`].
pub fn predicted_radial2<F: Fn(f64) -> f64, D: Fn(f64) -> f64>(ph: &Radial<F, D>, data: DataKind, r: f64) -> Result<f64> {
    let a = ph.support;
    let gl = GlRule::new(64);
    // K(p, k) = 4 ∫_0^{√(a-p)} k(p + s²) ds, both branches of the parabola
    let k_int = |p: f64, k: &dyn Fn(f64) -> f64| {
        if p >= a {
            0.0
        } else {
            4.0 * gl.integrate_composite(0.0, (a - p).sqrt(), 4, |s| k(p + s * s))
        }
    };
    let (k, dk): (Box<dyn Fn(f64) -> f64 + '_>, Box<dyn Fn(f64) -> f64 + '_>) = match data {
        DataKind::R => (
            Box::new(|u: f64| u.sqrt() * (ph.f)(u)),
            Box::new(|u: f64| 0.5 * (ph.f)(u) / u.sqrt() + u.sqrt() * (ph.df)(u)),
        ),
        DataKind::M => (Box::new(|u: f64| u * (ph.f)(u)), Box::new(|u: f64| (ph.f)(u) + u * (ph.df)(u))),
    };
    // h(q) = d/dq [q·K(q²)] with G = √p R f (or p M f) = q K(q²)
    let h = |q: f64| {
        let p = q * q;
        k_int(p, &*k) + 2.0 * p * k_int(p, &*dk)
    };
    let qa = a.sqrt();
    let pv = |theta: f64| {
        let c = theta.sqrt();
        let plus = adaptive(|q| h(q) / (c + q), 0.0, qa, &[]);
        let minus = if c < qa {
            let hc = h(c);
            adaptive(|q| (h(q) - hc) / (c - q), 0.0, qa, &[c]) + hc * (c / (qa - c)).ln()
        } else {
            adaptive(|q| h(q) / (c - q), 0.0, qa, &[])
        };
        (minus + plus) / (2.0 * c)
    };
    let kind = FilterKind::Palamodov2d(data);
    Ok(kind.prefactor(r) * radial_reduction(pv, r, 2, &[a])?)
}

/// Brute-force surface integral `∫_{Z(p,ω)} w(x) dS` through the intrinsic
/// parametrization, `dS = 2√(pr) dr dφ` in space and `√(r/(r-p)) dr` per planar
/// branch, with `r = p + s²`.
pub fn surface_integral<W: Fn(&Point) -> f64>(
    p: f64,
    omega: &Direction,
    reach: f64,
    radial: usize,
    azimuth: usize,
    w: W,
) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::NonPositiveP(p));
    }
    if reach <= p {
        return Ok(0.0);
    }
    let gl = GlRule::new(radial);
    let smax = (reach - p).sqrt();
    let point = |r: f64, azimuth: f64, branch: Branch| {
        paraboloid_point(&ParaboloidCoords { p, axis: *omega, r, azimuth, branch })
    };
    let mut total = 0.0;
    for (t, wt) in gl.nodes().iter().zip(gl.weights()) {
        let s = 0.5 * smax * (t + 1.0);
        let r = p + s * s;
        let ds = 0.5 * smax * wt;
        if omega.dim() == 2 {
            // √(r/(r-p)) dr = √r/s · 2s ds
            let jac = 2.0 * r.sqrt();
            for b in [Branch::Plus, Branch::Minus] {
                total += ds * jac * w(&point(r, 0.0, b)?);
            }
        } else {
            // 2√(pr) dr = 4√(pr) s ds
            let jac = 4.0 * (p * r).sqrt() * s;
            let dphi = 2.0 * PI / azimuth as f64;
            for k in 0..azimuth {
                total += ds * jac * dphi * w(&point(r, dphi * k as f64, Branch::Plus)?);
            }
        }
    }
    Ok(total)
}

/// The two brute-force sides of the weighted identity for `spec`:
/// `(p·M(r^{-1} f), M_b f)` with `M g = ∫ g dS/|∇θ|` and `M_b g = ∫ g |∇θ| dS`.
pub fn weighted_identity_sides(spec: &PhantomSpec, p: f64, omega: &Direction, radial: usize, azimuth: usize) -> Result<(f64, f64)> {
    let reach = spec.support_radius();
    let grad = |x: &Point| grad_theta(x, omega).map(|g| norm(&g)).unwrap_or(0.0);
    let m = surface_integral(p, omega, reach, radial, azimuth, |x| {
        let g = grad(x);
        if g == 0.0 {
            0.0
        } else {
            spec.eval(x) / norm(x) / g
        }
    })?;
    let mb = surface_integral(p, omega, reach, radial, azimuth, |x| spec.eval(x) * grad(x))?;
    Ok((p * m, mb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{incidence, sphere_rule};

    #[test]
    fn reduction_examples() {
        assert!((radial_reduction(|_| 1.0, 0.7, 3, &[]).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((radial_reduction(|p| p, 1.0, 3, &[]).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((radial_reduction(|_| 1.0, 0.7, 2, &[]).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(radial_reduction(|_| 1.0, 0.0, 3, &[]).is_err());
    }

    #[test]
    fn reduction_matches_sphere_quadrature() {
        let g = |p: f64| p * closed_form::mf(p);
        let x = [0.2, -0.3, (0.49f64 - 0.13).sqrt()];
        let rule = sphere_rule(3, 12, 24).unwrap();
        let direct = rule.integrate(|w| g(incidence(&x, w.as_point())));
        let reduced = radial_reduction(g, 0.7, 3, &[]).unwrap();
        assert!((direct - reduced).abs() < 1e-8 * reduced.abs(), "{direct} {reduced}");
    }

    #[test]
    fn one_dimensional_forms_match_closed_forms() {
        let ph = polybump();
        for p in [0.1, 0.25, 0.5, 0.9] {
            assert!((radial_rf3(&ph, p) - closed_form::rf(p)).abs() < 1e-13);
            assert!((radial_mf3(&ph, p) - closed_form::mf(p)).abs() < 1e-13);
        }
        assert!((closed_form::rf(0.25) - 0.909465002181460558).abs() < 1e-14);
        assert!((closed_form::mbf(0.5) - 0.405321552181897431).abs() < 1e-14);
    }

    #[test]
    fn spatial_predictions() {
        let ph = polybump();
        for r in [0.3, 0.5, 0.7] {
            let c = predicted_radial3(&ph, FilterKind::Cormack3d, r).unwrap();
            assert!((c - (ph.f)(r)).abs() < 1e-11, "{r} {c}");
            let m = predicted_radial3(&ph, FilterKind::Palamodov3d(DataKind::M), r).unwrap();
            assert!((m - closed_form::palamodov3d_m(r)).abs() < 1e-11, "{r} {m}");
        }
        assert_eq!(closed_form::palamodov3d_m(0.5), 1.52734375);
        // 2f + 2 r^{-3/2} ∫_0^r √u f du
        let want = [(0.3, 2.694831582683983), (0.5, 1.812527056277056), (0.7, 0.989189539393939)];
        for (r, v) in want {
            let got = predicted_radial3(&ph, FilterKind::Palamodov3d(DataKind::R), r).unwrap();
            assert!((got - v).abs() < 1e-10, "{r} {got}");
        }
    }

    #[test]
    fn planar_predictions_match_cauchy_weight_oracle() {
        let ph = polybump();
        let want = [
            (DataKind::R, [-1.210948928571432, -0.8145089285714281, -0.45127749999999467]),
            (DataKind::M, [-1.0504933956710027, -0.6640692640692667, -0.3136228848484862]),
        ];
        for (data, vals) in want {
            for (r, v) in [0.3, 0.5, 0.7].into_iter().zip(vals) {
                let got = predicted_radial2(&ph, data, r).unwrap();
                assert!((got - v).abs() < 1e-7 * v.abs(), "{data:?} {r}: {got} vs {v}");
            }
        }
    }

    #[test]
    fn brute_force_identity_sides_agree_with_closed_form() {
        let spec = PhantomSpec::centered_polybump(3);
        let w = Direction::new(&[0.3, -0.4, 0.5]).unwrap();
        let (a, b) = weighted_identity_sides(&spec, 0.5, &w, 24, 4).unwrap();
        assert!((a - closed_form::mbf(0.5)).abs() < 1e-12);
        assert!((b - closed_form::mbf(0.5)).abs() < 1e-12);
    }
}
