//! Monte-Carlo estimate of the thin-slab integral
//! `(1/ε) ∫_{p ≤ θ(x,ω) ≤ p+ε} |x|^k f(x) dx`, which tends to `M(r^k f)(p, ω)`.
//!
//! Samples are drawn uniformly in the phantom's bounding box. The sample
//! stream is split into fixed-size chunks, each with its own ChaCha stream,
//! so the estimate does not depend on how chunks are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{incidence, norm, Direction};
use crate::phantom::PhantomSpec;

const CHUNK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

#[derive(Debug, Clone)]
pub struct SlabOracle<'a> {
    spec: &'a PhantomSpec,
    radial_exponent: f64,
}

impl<'a> SlabOracle<'a> {
    pub fn new(spec: &'a PhantomSpec) -> Self {
        Self { spec, radial_exponent: 0.0 }
    }

    /// Integrate `|x|^k f` instead of `f`.
    pub fn with_radial_exponent(mut self, k: f64) -> Self {
        self.radial_exponent = k;
        self
    }

    pub fn estimate(&self, p: f64, omega: &Direction, eps: f64, n: u64, seed: u64) -> Result<McEstimate> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("slab width must be positive, got {eps}")));
        }
        if n < 100_000 {
            return Err(Error::InvalidParameter(format!("need at least 1e5 samples, got {n}")));
        }
        if !(p > 0.0) {
            return Err(Error::NonPositiveP(p));
        }
        let dim = self.spec.dim;
        let (lo, hi) = self.spec.bounding_box();
        let volume: f64 = (0..dim).map(|k| hi[k] - lo[k]).product();
        if self.spec.components.is_empty() || volume == 0.0 {
            return Ok(McEstimate { mean: 0.0, std_error: 0.0, samples: n });
        }
        let scale = volume / eps;
        let w = *omega.as_point();
        let k = self.radial_exponent;

        let chunks = n.div_ceil(CHUNK);
        let partial: Vec<(f64, f64)> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(c);
                let count = CHUNK.min(n - c * CHUNK);
                let (mut s1, mut s2) = (0.0, 0.0);
                for _ in 0..count {
                    let mut x = [0.0; 3];
                    for d in 0..dim {
                        x[d] = lo[d] + (hi[d] - lo[d]) * rng.random::<f64>();
                    }
                    let t = incidence(&x, &w);
                    if t >= p && t <= p + eps {
                        let mut y = self.spec.eval(&x);
                        if k != 0.0 && y != 0.0 {
                            y *= norm(&x).powf(k);
                        }
                        let y = y * scale;
                        s1 += y;
                        s2 += y * y;
                    }
                }
                (s1, s2)
            })
            .collect();
        let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        let nf = n as f64;
        let mean = s1 / nf;
        let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        Ok(McEstimate { mean, std_error: (var / nf).sqrt(), samples: n })
    }
}
