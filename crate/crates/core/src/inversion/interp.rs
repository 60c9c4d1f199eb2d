//! Interpolation of filtered profiles at arbitrary `p`.

/// Interpolation scheme for spatial back-projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Catmull–Rom inside, linear in the two edge cells.
    #[default]
    Cubic,
    Linear,
}

/// View of a profile on the cell-centered grid `p_j = (j + 1/2) Δp`.
///
/// Evaluates to zero outside `(0, p_max]`. Between `0` and the first node,
/// and between the last node and `p_max`, the edge cell's line is extended.
#[derive(Debug, Clone, Copy)]
pub struct ProfileInterpolator<'a> {
    values: &'a [f64],
    inv_dp: f64,
    p_max: f64,
    mode: Interpolation,
}

impl<'a> ProfileInterpolator<'a> {
    pub fn new(values: &'a [f64], dp: f64, mode: Interpolation) -> Self {
        Self { values, inv_dp: 1.0 / dp, p_max: dp * values.len() as f64, mode }
    }

    #[inline]
    pub fn eval(&self, p: f64) -> f64 {
        if !(p > 0.0 && p <= self.p_max) {
            return 0.0;
        }
        let v = self.values;
        let n = v.len();
        let u = p * self.inv_dp - 0.5;
        let j = u.floor();
        let t = u - j;
        let j = j as isize;
        if self.mode == Interpolation::Cubic && j >= 1 && (j as usize) + 2 < n {
            let j = j as usize;
            let (p0, p1, p2, p3) = (v[j - 1], v[j], v[j + 1], v[j + 2]);
            return p1
                + 0.5
                    * t
                    * ((p2 - p0)
                        + t * ((2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) + t * (3.0 * (p1 - p2) + p3 - p0)));
        }
        // Linear, extended past the first and last nodes.
        let j = j.clamp(0, n as isize - 2) as usize;
        let t = u - j as f64;
        v[j] + t * (v[j + 1] - v[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_cubics() {
        let dp = 0.1;
        let f = |p: f64| 1.0 - 2.0 * p + 0.5 * p * p - 0.3 * p * p * p;
        let v: Vec<f64> = (0..20).map(|j| f((j as f64 + 0.5) * dp)).collect();
        let it = ProfileInterpolator::new(&v, dp, Interpolation::Cubic);
        for j in 0..20 {
            assert!((it.eval((j as f64 + 0.5) * dp) - v[j]).abs() < 1e-14);
        }
        // Catmull–Rom reproduces quadratics exactly; cubics to O(Δp³)
        let q = |p: f64| 1.0 - 2.0 * p + 0.5 * p * p;
        let vq: Vec<f64> = (0..20).map(|j| q((j as f64 + 0.5) * dp)).collect();
        let iq = ProfileInterpolator::new(&vq, dp, Interpolation::Cubic);
        for &p in &[0.27, 0.91, 1.333, 1.6] {
            assert!((iq.eval(p) - q(p)).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_outside_and_linear_at_edges() {
        let dp = 0.5;
        let v = vec![1.0, 2.0, 4.0, 8.0];
        let it = ProfileInterpolator::new(&v, dp, Interpolation::Cubic);
        assert_eq!(it.eval(0.0), 0.0);
        assert_eq!(it.eval(-1.0), 0.0);
        assert_eq!(it.eval(2.0001), 0.0);
        // first cell extends the line through nodes 0 and 1
        assert!((it.eval(0.125) - 0.75).abs() < 1e-15);
        // last cell extends the line through nodes 2 and 3
        assert!((it.eval(2.0) - 10.0).abs() < 1e-15);
        let lin = ProfileInterpolator::new(&v, dp, Interpolation::Linear);
        assert!((lin.eval(1.0) - 3.0).abs() < 1e-15);
    }
}
