//! Principal-value integrals against piecewise-linear interpolants, integrated exactly.
//!
//! On a cell `[a, b]` where `h` is the line `L` with slope `s`,
//! `∫_a^b L(q)/(z - q) dq = L(z) ln|(z - a)/(z - b)| - s (b - a)`. Summed over
//! cells the log at an interior knot `k` carries `(s_right - s_left)(z - k)`,
//! so the singular cell contributes only `x ln|x|` terms that vanish at the knot:
//!
//! ```text
//! p.v. ∫_0^B h(q)/(z - q) dq = L_first(z) ln|z| - L_last(z) ln|z - B| + Σ_k Δs_k (z - k) ln|z - k| - (h(B) - h(0))
//! ```
//!
//! Filtered planar profiles behave like `p^{-1/2}` at the vertex, which a
//! linear interpolant in `p` resolves only to `O(Δp^{1/2})`. [`PvKernel`]
//! therefore works in `q = √p`, where `h(q) = 2q H(q²)` stays bounded, and uses
//! `1/(θ - p) = [1/(c - q) + 1/(c + q)] / (2c)` with `c = √θ`.

/// `p.v. ∫_0^B h(q)/(z - q) dq` for `h` piecewise linear on arbitrary knots.
#[derive(Debug, Clone)]
pub struct LogLinearPv {
    end: f64,
    h0: f64,
    s_first: f64,
    h_end: f64,
    s_last: f64,
    /// (knot, slope jump) wherever the slope changes.
    jumps: Vec<(f64, f64)>,
}

impl LogLinearPv {
    /// `knots` strictly increasing from `0` to `B` with matching `values`.
    pub fn new(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        assert!(n >= 2 && values.len() == n, "need matching knots and values");
        debug_assert!(knots[0] == 0.0 && knots.windows(2).all(|w| w[0] < w[1]));
        let slope = |j: usize| (values[j + 1] - values[j]) / (knots[j + 1] - knots[j]);
        let jumps = (1..n - 1)
            .filter_map(|j| {
                let d = slope(j) - slope(j - 1);
                (d != 0.0).then_some((knots[j], d))
            })
            .collect();
        Self {
            end: knots[n - 1],
            h0: values[0],
            s_first: slope(0),
            h_end: values[n - 1],
            s_last: slope(n - 2),
            jumps,
        }
    }

    /// Diverges logarithmically at `z = 0` and `z = B` unless `h` vanishes there.
    pub fn eval(&self, z: f64) -> f64 {
        let xlog = |x: f64| if x == 0.0 { 0.0 } else { x * x.abs().ln() };
        let first = (self.h0 + self.s_first * z) * z.abs().ln();
        let last = (self.h_end + self.s_last * (z - self.end)) * (z - self.end).abs().ln();
        let interior: f64 = self.jumps.iter().map(|&(k, d)| d * xlog(z - k)).sum();
        first - last + interior - (self.h_end - self.h0)
    }
}

/// `Q(θ) = p.v. ∫_0^P H(p)/(θ - p) dp` for a profile on `p_j = (j + 1/2) Δp`, `P = N Δp`.
///
/// `2q H(q²)` is interpolated linearly in `q = √p` through the nodes `√p_j`,
/// extended linearly to `q = 0` and `q = √P`.
#[derive(Debug, Clone)]
pub struct PvKernel {
    inner: LogLinearPv,
}

impl PvKernel {
    pub fn new(h: &[f64], dp: f64) -> Self {
        let n = h.len();
        assert!(n >= 2, "need at least two samples");
        let mut knots = Vec::with_capacity(n + 2);
        let mut values = Vec::with_capacity(n + 2);
        knots.push(0.0);
        values.push(0.0);
        for (j, v) in h.iter().enumerate() {
            let q = ((j as f64 + 0.5) * dp).sqrt();
            knots.push(q);
            values.push(2.0 * q * v);
        }
        let extend = |a: usize, b: usize, q: f64, k: &[f64], v: &[f64]| {
            v[a] + (q - k[a]) * (v[b] - v[a]) / (k[b] - k[a])
        };
        values[0] = extend(1, 2, 0.0, &knots, &values);
        let end = (n as f64 * dp).sqrt();
        let last = extend(n - 1, n, end, &knots, &values);
        knots.push(end);
        values.push(last);
        Self { inner: LogLinearPv::new(&knots, &values) }
    }

    /// Valid for `θ > 0`. Blows up logarithmically at `θ = P` unless the data vanish there.
    pub fn eval(&self, theta: f64) -> f64 {
        let c = theta.sqrt();
        (self.inner.eval(c) - self.inner.eval(-c)) / (2.0 * c)
    }
}
