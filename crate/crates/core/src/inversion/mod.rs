//! Filtered back-projection from paraboloid sinograms.
//!
//! Every kind evaluates its filtered profile at `p* = θ(x, ω)`. For the
//! Cormack kind the literal evaluation point is `r(1 + ⟨ξ, ω⟩)/2`, which is
//! `θ(x, -ω)`; on a rule symmetric under `ω → -ω` the two sums agree, so one
//! code path serves all kinds.
//!
//! Back-projection runs over pixel slices in parallel. Inside a slice the loop
//! order is directions outer, pixels inner, and each pixel accumulates in rule
//! order, so results are bitwise identical at any thread count.

mod filter;
mod interp;
mod pv;

pub use filter::{filter_profile, first_derivative, first_derivative_uneven, second_derivative, MIN_PROFILE};
pub use interp::{Interpolation, ProfileInterpolator};
pub use pv::{LogLinearPv, PvKernel};

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{incidence, norm, Point, SphereRule};
use crate::transforms::{SinogramGrid, TransformKind};

/// Which transform the sinogram holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataKind {
    R,
    M,
}

impl DataKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DataKind::R => "R",
            DataKind::M => "M",
        }
    }

    fn transform(self) -> TransformKind {
        match self {
            DataKind::R => TransformKind::R,
            DataKind::M => TransformKind::M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Palamodov2d(DataKind),
    Palamodov3d(DataKind),
    /// Always consumes R data.
    Cormack3d,
}

impl FilterKind {
    pub fn dim(self) -> usize {
        match self {
            FilterKind::Palamodov2d(_) => 2,
            _ => 3,
        }
    }

    pub fn data(self) -> DataKind {
        match self {
            FilterKind::Palamodov2d(d) | FilterKind::Palamodov3d(d) => d,
            FilterKind::Cormack3d => DataKind::R,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Palamodov2d(_) => "palamodov2d",
            FilterKind::Palamodov3d(_) => "palamodov3d",
            FilterKind::Cormack3d => "cormack3d",
        }
    }

    /// Overall factor applied after the direction sum at radius `r`.
    pub fn prefactor(self, r: f64) -> f64 {
        let pi2 = PI * PI;
        match self {
            FilterKind::Palamodov2d(DataKind::R) => -1.0 / (4.0 * pi2 * r.sqrt()),
            FilterKind::Palamodov2d(DataKind::M) => -1.0 / (4.0 * pi2 * r),
            FilterKind::Palamodov3d(DataKind::R) => -1.0 / (8.0 * pi2 * r.sqrt()),
            FilterKind::Palamodov3d(DataKind::M) => -1.0 / (8.0 * pi2 * r),
            FilterKind::Cormack3d => -1.0 / (16.0 * pi2 * r.sqrt()),
        }
    }

    /// Checks that a sinogram of dimension `dim` holding `kind` data fits this filter.
    pub fn check(self, dim: usize, kind: TransformKind) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        if kind != self.data().transform() {
            return Err(Error::WrongDataKind { filter: self.name(), data: kind.as_str() });
        }
        Ok(())
    }
}

/// Derivative stencils are fixed at second order and are not configurable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionConfig {
    pub filter: FilterKind,
    /// Used by the spatial kinds. The planar kind always integrates the linear interpolant.
    pub interpolation: Interpolation,
    /// Pixels closer than this to the origin are excluded.
    pub r_min: f64,
}

impl ReconstructionConfig {
    pub fn new(filter: FilterKind) -> Self {
        Self { filter, interpolation: Interpolation::Cubic, r_min: 1e-3 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) || !self.r_min.is_finite() {
            return Err(Error::InvalidParameter(format!("r_min must be positive, got {}", self.r_min)));
        }
        Ok(())
    }
}

/// Profiles after filtering, one per direction, on the sinogram's p-grid.
#[derive(Debug, Clone)]
pub struct FilteredSinogram {
    pub dim: usize,
    pub filter: FilterKind,
    pub p_max: f64,
    pub np: usize,
    pub rule: SphereRule,
    pub values: Vec<f64>,
}

impl FilteredSinogram {
    pub fn dp(&self) -> f64 {
        self.p_max / self.np as f64
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.np..(k + 1) * self.np]
    }
}

/// Filters every direction of `sino`.
pub fn filter_sinogram(sino: &SinogramGrid, filter: FilterKind) -> Result<FilteredSinogram> {
    filter.check(sino.dim, sino.kind)?;
    if sino.rule.is_empty() {
        return Err(Error::EmptyRule);
    }
    if sino.np < MIN_PROFILE {
        return Err(Error::GridTooShort { len: sino.np, min: MIN_PROFILE });
    }
    let dp = sino.dp();
    let rows: Vec<Vec<f64>> = (0..sino.n_directions())
        .into_par_iter()
        .map(|k| filter_profile(sino.row(k), dp, filter))
        .collect::<Result<_>>()?;
    Ok(FilteredSinogram {
        dim: sino.dim,
        filter,
        p_max: sino.p_max,
        np: sino.np,
        rule: sino.rule.clone(),
        values: rows.concat(),
    })
}

/// Cell-centered Cartesian grid. Storage is row-major: the last axis varies fastest.
/// Planar grids keep `counts[2] == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGeometry {
    pub dim: usize,
    pub counts: [usize; 3],
    pub spacing: [f64; 3],
    /// Center of the first pixel.
    pub origin: [f64; 3],
    pub r_min: f64,
}

impl ImageGeometry {
    /// `n` pixels per axis covering `[-half_width, half_width]^dim`.
    pub fn centered(dim: usize, n: usize, half_width: f64, r_min: f64) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if n == 0 || !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("bad image size n={n}, half width={half_width}")));
        }
        let h = 2.0 * half_width / n as f64;
        let o = -half_width + 0.5 * h;
        let mut g = Self { dim, counts: [n, n, 1], spacing: [h, h, 1.0], origin: [o, o, 0.0], r_min };
        if dim == 3 {
            g.counts[2] = n;
            g.spacing[2] = h;
            g.origin[2] = o;
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Point {
        let [_, n1, n2] = self.counts;
        let idx = [index / (n1 * n2), (index / n2) % n1, index % n2];
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + self.spacing[a] * idx[a] as f64;
        }
        x
    }

    pub fn is_excluded(&self, index: usize) -> bool {
        norm(&self.point(index)) < self.r_min
    }
}

/// Reconstructed values. Excluded pixels hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pub geometry: ImageGeometry,
    pub values: Vec<f64>,
}

impl ImageGrid {
    pub fn get(&self, index: usize) -> Option<f64> {
        let v = self.values[index];
        (!v.is_nan()).then_some(v)
    }
}

/// Per-direction evaluator shared by the two back-projection paths.
enum Evaluators<'a> {
    Spatial(Vec<ProfileInterpolator<'a>>),
    Planar(Vec<PvKernel>),
}

impl<'a> Evaluators<'a> {
    fn build(f: &'a FilteredSinogram, cfg: &ReconstructionConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.filter != f.filter {
            return Err(Error::InvalidParameter(format!(
                "filtered with {} but configured for {}",
                f.filter.name(),
                cfg.filter.name()
            )));
        }
        if f.rule.is_empty() {
            return Err(Error::EmptyRule);
        }
        if f.rule.dim != f.dim || f.dim != f.filter.dim() {
            return Err(Error::DimensionMismatch { expected: f.filter.dim(), found: f.rule.dim });
        }
        let dp = f.dp();
        let n = f.rule.len();
        Ok(if f.dim == 3 {
            Evaluators::Spatial((0..n).map(|k| ProfileInterpolator::new(f.row(k), dp, cfg.interpolation)).collect())
        } else {
            Evaluators::Planar((0..n).into_par_iter().map(|k| PvKernel::new(f.row(k), dp)).collect())
        })
    }

    /// Adds the weighted direction sum for each point into `out`.
    fn accumulate(&self, rule: &SphereRule, xs: &[Point], rs: &[f64], out: &mut [f64]) {
        for (k, (node, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let omega = node.as_point();
            match self {
                Evaluators::Spatial(v) => {
                    let it = &v[k];
                    for ((x, &r), o) in xs.iter().zip(rs).zip(out.iter_mut()) {
                        *o += w * it.eval(0.5 * (r - dot3(x, omega)));
                    }
                }
                Evaluators::Planar(v) => {
                    let kern = &v[k];
                    for ((x, &r), o) in xs.iter().zip(rs).zip(out.iter_mut()) {
                        let t = incidence(x, omega);
                        // θ = 0 only on the ray along ω: a null set for the log-singular integrand
                        if t > 1e-15 * r {
                            *o += w * kern.eval(t);
                        }
                    }
                }
            }
        }
    }
}

#[inline]
fn dot3(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn finish(filter: FilterKind, r_min: f64, rs: &[f64], out: &mut [f64]) {
    for (o, &r) in out.iter_mut().zip(rs) {
        *o = if r < r_min { f64::NAN } else { *o * filter.prefactor(r) };
    }
}

const POINT_CHUNK: usize = 256;

/// Back-projects at arbitrary points. Points inside `r_min` give NaN.
pub fn backproject_points(f: &FilteredSinogram, cfg: &ReconstructionConfig, points: &[Point]) -> Result<Vec<f64>> {
    let ev = Evaluators::build(f, cfg)?;
    let mut out = vec![0.0; points.len()];
    out.par_chunks_mut(POINT_CHUNK).zip(points.par_chunks(POINT_CHUNK)).for_each(|(o, xs)| {
        let rs: Vec<f64> = xs.iter().map(norm).collect();
        ev.accumulate(&f.rule, xs, &rs, o);
        finish(f.filter, cfg.r_min, &rs, o);
    });
    Ok(out)
}

/// Back-projects onto a Cartesian grid, one parallel task per slice across the first axis.
pub fn backproject(f: &FilteredSinogram, cfg: &ReconstructionConfig, geometry: &ImageGeometry) -> Result<ImageGrid> {
    if geometry.dim != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: geometry.dim });
    }
    let ev = Evaluators::build(f, cfg)?;
    let row = geometry.counts[1] * geometry.counts[2];
    let mut values = vec![0.0; geometry.len()];
    values.par_chunks_mut(row).enumerate().for_each(|(i, o)| {
        let xs: Vec<Point> = (0..row).map(|j| geometry.point(i * row + j)).collect();
        let rs: Vec<f64> = xs.iter().map(norm).collect();
        ev.accumulate(&f.rule, &xs, &rs, o);
        finish(f.filter, geometry.r_min, &rs, o);
    });
    Ok(ImageGrid { geometry: geometry.clone(), values })
}

/// Filters once per direction, then back-projects.
pub fn reconstruct(sino: &SinogramGrid, cfg: &ReconstructionConfig, geometry: &ImageGeometry) -> Result<ImageGrid> {
    let f = filter_sinogram(sino, cfg.filter)?;
    backproject(&f, cfg, geometry)
}


#[cfg(test)]
mod equivariance {
    use super::*;
    use crate::phantom::{Component, PhantomSpec};
    use crate::transforms::{forward_sinogram, QuadParams, SinogramParams};

    /// A quarter turn about the last image axis maps pixel centers onto pixel
    /// centers, and both direction rules are invariant under it.
    fn quarter_turn_check(dim: usize, filter: FilterKind, kind: TransformKind) {
        let n = 8;
        let centers: &[f64] = if dim == 3 { &[0.25, -0.15, 0.1] } else { &[0.25, -0.15] };
        let spec = PhantomSpec::new(dim, vec![Component::polybump(centers, 0.5, 1.0)]).unwrap();
        let turned = spec.transformed(&[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        let params = SinogramParams { np: 128, p_max: 1.0, polar: 8, azimuth: 16, quad: QuadParams::default() };
        let cfg = ReconstructionConfig { r_min: 0.05, ..ReconstructionConfig::new(filter) };
        let geometry = ImageGeometry::centered(dim, n, 1.0, cfg.r_min).unwrap();
        let a = reconstruct(&forward_sinogram(&spec, kind, &params).unwrap(), &cfg, &geometry).unwrap();
        let b = reconstruct(&forward_sinogram(&turned, kind, &params).unwrap(), &cfg, &geometry).unwrap();
        let (n1, n2) = (geometry.counts[1], geometry.counts[2]);
        let mut worst: f64 = 0.0;
        for idx in 0..geometry.len() {
            let (i, j, k) = (idx / (n1 * n2), (idx / n2) % n1, idx % n2);
            // (x, y) -> (-y, x) sends (i, j) to (n-1-j, i)
            let (u, v) = (a.values[idx], b.values[((n - 1 - j) * n1 + i) * n2 + k]);
            if u.is_nan() {
                assert!(v.is_nan());
            } else {
                worst = worst.max((u - v).abs());
            }
        }
        assert!(worst <= 1e-8, "{}: {worst}", filter.name());
    }

    #[test]
    fn reconstruction_commutes_with_quarter_turns() {
        quarter_turn_check(3, FilterKind::Cormack3d, TransformKind::R);
        quarter_turn_check(3, FilterKind::Palamodov3d(DataKind::M), TransformKind::M);
        quarter_turn_check(2, FilterKind::Palamodov2d(DataKind::R), TransformKind::R);
    }
}
