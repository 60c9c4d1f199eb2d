//! One-dimensional quadrature building blocks.
//!
//! Gauss–Legendre nodes come from `gauss-quad`; the adaptive Gauss–Kronrod
//! integrator is the classic G7/K15 bisection scheme and is used by the
//! independent oracles (radial reduction, axial ray integrals).

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

/// Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone)]
pub struct GlRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GlRule {
    /// Rule with `order` nodes. Orders below 1 are bumped to 1.
    pub fn new(order: usize) -> Self {
        let degree = NonZeroUsize::new(order.max(1)).unwrap();
        let rule = GaussLegendre::new(degree);
        let (nodes, weights) = rule.as_node_weight_pairs().iter().copied().unzip();
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b] with a single panel.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule: [a, b] split into `panels` equal panels.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = 0.0;
        for k in 0..panels {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            acc += self.integrate(lo, hi, &mut f);
        }
        acc
    }
}

// Kronrod 15-point abscissae (non-negative half) and weights, with the
// embedded Gauss 7-point weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive G7/K15 integration of `f` over [a, b].
///
/// Intervals are bisected (worst error first) until the summed error estimate
/// is below `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
/// Interior breakpoints can be supplied to seed the partition at known kinks.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Adaptive {
    const MAX_INTERVALS: usize = 20_000;
    if a == b {
        return Adaptive { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a.min(b) && x < a.max(b)));
    edges.push(b);
    let last = edges.len() - 1;
    if a > b {
        edges[1..last].sort_by(|x, y| y.total_cmp(x));
    } else {
        edges[1..last].sort_by(|x, y| x.total_cmp(y));
    }

    // (lo, hi, value, error)
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut evaluations = 0;
    for w in edges.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        evaluations += 15;
        intervals.push((w[0], w[1], v, e));
    }
    loop {
        let value: f64 = intervals.iter().map(|t| t.2).sum();
        let error: f64 = intervals.iter().map(|t| t.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || intervals.len() >= MAX_INTERVALS {
            return Adaptive { value, error, evaluations };
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            // Interval exhausted at machine precision; accept what we have.
            let value: f64 = intervals.iter().map(|t| t.2).sum::<f64>() + gk15(&mut f, lo, hi).0;
            return Adaptive { value, error, evaluations };
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Convenience wrapper returning only the value.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_adaptive(f, a, b, &[], tol, tol).value
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_exact_for_polynomials() {
        let rule = GlRule::new(8);
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
        assert!((rule.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate_adaptive(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, &[], 1e-12, 1e-12);
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn adaptive_uses_breakpoints() {
        let f = |x: f64| (x - 0.3).abs();
        let v = integrate_adaptive(f, 0.0, 1.0, &[0.3], 1e-14, 1e-14).value;
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x| x * x, 1.0, 0.0, 1e-14);
        assert!((v + 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 1.5).abs() < 1e-12);
    }
}
