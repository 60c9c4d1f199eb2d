//! One-dimensional profile filters on the cell-centered p-grid.

use crate::error::{Error, Result};

use super::{DataKind, FilterKind};

/// Shortest profile any filter accepts.
pub const MIN_PROFILE: usize = 8;

/// Second-order first derivative: central inside, one-sided three-point at the ends.
pub fn first_derivative(g: &[f64], dp: f64) -> Vec<f64> {
    let n = g.len();
    let inv = 0.5 / dp;
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) * inv;
    for j in 1..n - 1 {
        out[j] = (g[j + 1] - g[j - 1]) * inv;
    }
    out[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) * inv;
    out
}

/// Second-order second derivative: central inside, one-sided four-point at the ends.
pub fn second_derivative(g: &[f64], dp: f64) -> Vec<f64> {
    let n = g.len();
    let inv = 1.0 / (dp * dp);
    let mut out = vec![0.0; n];
    out[0] = (2.0 * g[0] - 5.0 * g[1] + 4.0 * g[2] - g[3]) * inv;
    for j in 1..n - 1 {
        out[j] = (g[j + 1] - 2.0 * g[j] + g[j - 1]) * inv;
    }
    out[n - 1] = (2.0 * g[n - 1] - 5.0 * g[n - 2] + 4.0 * g[n - 3] - g[n - 4]) * inv;
    out
}

/// Second-order first derivative on increasing, unevenly spaced nodes.
pub fn first_derivative_uneven(x: &[f64], g: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        let (a, b) = (x[j] - x[j - 1], x[j + 1] - x[j]);
        out[j] = (-b / (a * (a + b))) * g[j - 1] + ((b - a) / (a * b)) * g[j] + (a / (b * (a + b))) * g[j + 1];
    }
    let (a, b) = (x[1] - x[0], x[2] - x[1]);
    out[0] = -(2.0 * a + b) / (a * (a + b)) * g[0] + (a + b) / (a * b) * g[1] - a / (b * (a + b)) * g[2];
    let (a, b) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
    out[n - 1] = b / (a * (a + b)) * g[n - 3] - (a + b) / (a * b) * g[n - 2] + (2.0 * b + a) / (b * (a + b)) * g[n - 1];
    out
}

#[inline]
fn p_at(j: usize, dp: f64) -> f64 {
    (j as f64 + 0.5) * dp
}

/// Applies the filter of `kind` to a profile sampled at `p_j = (j + 1/2) Δp`.
///
/// * Planar Palamodov: `∂_p G` with `G = p^{1/2}·profile` (R data) or `p·profile` (M data).
///   `G` grows like `√p` at the vertex, where a p-stencil stays O(1) wrong at any
///   resolution. The derivative is therefore taken in `q = √p` on the nodes
///   `√p_j` plus the exact value `G(0) = 0`, and mapped back by `∂_p = ∂_q / (2q)`.
/// * Spatial Palamodov: `∂²_p G` with the same `G`.
/// * Cormack: `∂_p(p ∂_p(p^{-1/2}·profile))`, the nested form of `(∂_p p)²(profile / p^{3/2})`.
///
/// Nesting two one-sided end stencils costs an order in the last two cells.
/// Those sit beyond the support radius whenever `p_max` exceeds it, where the data vanish.
pub fn filter_profile(values: &[f64], dp: f64, kind: FilterKind) -> Result<Vec<f64>> {
    if values.len() < MIN_PROFILE {
        return Err(Error::GridTooShort { len: values.len(), min: MIN_PROFILE });
    }
    if !(dp > 0.0) {
        return Err(Error::InvalidParameter(format!("Δp must be positive, got {dp}")));
    }
    let weighted = |data: DataKind| -> Vec<f64> {
        values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let p = p_at(j, dp);
                match data {
                    DataKind::R => p.sqrt() * v,
                    DataKind::M => p * v,
                }
            })
            .collect()
    };
    Ok(match kind {
        FilterKind::Palamodov2d(data) => {
            let mut q = Vec::with_capacity(values.len() + 1);
            let mut g = Vec::with_capacity(values.len() + 1);
            q.push(0.0);
            g.push(0.0);
            for (j, v) in weighted(data).into_iter().enumerate() {
                q.push(p_at(j, dp).sqrt());
                g.push(v);
            }
            let d = first_derivative_uneven(&q, &g);
            d[1..].iter().zip(&q[1..]).map(|(d, q)| d / (2.0 * q)).collect()
        }
        FilterKind::Palamodov3d(data) => second_derivative(&weighted(data), dp),
        FilterKind::Cormack3d => {
            let h: Vec<f64> = values.iter().enumerate().map(|(j, v)| v / p_at(j, dp).sqrt()).collect();
            let mut inner = first_derivative(&h, dp);
            for (j, v) in inner.iter_mut().enumerate() {
                *v *= p_at(j, dp);
            }
            first_derivative(&inner, dp)
        }
    })
}
