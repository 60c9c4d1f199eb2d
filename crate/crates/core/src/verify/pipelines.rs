//! End-to-end reconstructions shared by the suites and the acceptance tests.

use std::time::Instant;

use crate::error::Result;
use crate::geometry::{norm, Direction, Point};
use crate::inversion::{
    backproject, backproject_points, filter_profile, filter_sinogram, FilterKind, ImageGeometry, ImageGrid,
    Interpolation, ReconstructionConfig,
};
use crate::phantom::PhantomSpec;
use crate::transforms::{forward_sinogram, QuadParams, SinogramParams, SurfaceIntegrator, TransformKind};

use super::oracles::{polybump, radial_reduction_profile};

/// Cormack reconstruction of the centered polybump from a single sampled `R f`
/// profile: filtering on `np` cells of `(0, 1]`, then the radial reduction in
/// place of the direction sum. Returns `(r, reconstruction, f(r))` per radius.
pub fn cormack_semi_discrete(np: usize, radii: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let spec = PhantomSpec::centered_polybump(3);
    let integ = SurfaceIntegrator::new(QuadParams::default());
    let axis = Direction::new(&[0.0, 0.0, 1.0])?;
    let dp = 1.0 / np as f64;
    let profile: Vec<f64> =
        (0..np).map(|j| TransformKind::R.evaluate(&integ, &spec, (j as f64 + 0.5) * dp, &axis)).collect();
    let filtered = filter_profile(&profile, dp, FilterKind::Cormack3d)?;
    let f = polybump().f;
    radii
        .iter()
        .map(|&r| {
            let sum = radial_reduction_profile(&filtered, dp, r, 3, Interpolation::Cubic)?;
            Ok((r, FilterKind::Cormack3d.prefactor(r) * sum, f(r)))
        })
        .collect()
}

/// Forward-projects `spec`, filters and back-projects at `points`.
pub fn point_reconstruction(
    spec: &PhantomSpec,
    filter: FilterKind,
    np: usize,
    polar: usize,
    azimuth: usize,
    points: &[Point],
) -> Result<Vec<f64>> {
    let kind = match filter.data() {
        crate::inversion::DataKind::R => TransformKind::R,
        crate::inversion::DataKind::M => TransformKind::M,
    };
    let params = SinogramParams { np, p_max: 1.0_f64.max(spec.support_radius()), polar, azimuth, quad: QuadParams::default() };
    let sino = forward_sinogram(spec, kind, &params)?;
    let f = filter_sinogram(&sino, filter)?;
    backproject_points(&f, &ReconstructionConfig::new(filter), points)
}

#[derive(Debug, Clone)]
pub struct VolumeStudy {
    /// Relative L2 error over pixels with `0.1 ≤ |x| ≤ 0.95`.
    pub l2_rel: f64,
    pub pixels: usize,
    pub forward_seconds: f64,
    pub reconstruct_seconds: f64,
    pub image: ImageGrid,
}

/// Full Cormack pipeline on the centered polybump over `grid³` pixels of `[-1, 1]³`.
pub fn cormack_volume_study(np: usize, polar: usize, azimuth: usize, grid: usize) -> Result<VolumeStudy> {
    let spec = PhantomSpec::centered_polybump(3);
    let params = SinogramParams { np, p_max: 1.0, polar, azimuth, quad: QuadParams::default() };
    let t0 = Instant::now();
    let sino = forward_sinogram(&spec, TransformKind::R, &params)?;
    let forward_seconds = t0.elapsed().as_secs_f64();
    let cfg = ReconstructionConfig { r_min: 0.05, ..ReconstructionConfig::new(FilterKind::Cormack3d) };
    let geometry = ImageGeometry::centered(3, grid, 1.0, cfg.r_min)?;
    let t1 = Instant::now();
    let filtered = filter_sinogram(&sino, cfg.filter)?;
    let image = backproject(&filtered, &cfg, &geometry)?;
    let reconstruct_seconds = t1.elapsed().as_secs_f64();
    let (mut num, mut den, mut pixels) = (0.0, 0.0, 0);
    for (i, v) in image.values.iter().enumerate() {
        let x = geometry.point(i);
        let r = norm(&x);
        if (0.1..=0.95).contains(&r) {
            let truth = spec.eval(&x);
            num += (v - truth).powi(2);
            den += truth * truth;
            pixels += 1;
        }
    }
    Ok(VolumeStudy { l2_rel: (num / den).sqrt(), pixels, forward_seconds, reconstruct_seconds, image })
}
