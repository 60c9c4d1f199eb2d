//! PSG1: sampled transform values over a direction rule.
//!
//! ```text
//! "PSG1" u32 version=1  u32 n  u64 Np  u64 Ndir  f64 p_max
//! u32 scheme id  u32 L  u32 M
//! Ndir × (n × f64 component, f64 weight)
//! Ndir × Np × f64 values, direction-major
//! u64 metadata length, metadata bytes
//! ```

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, Direction, RuleScheme, SphereRule};
use crate::transforms::{SinogramGrid, TransformKind};

use super::codec::{to_usize, Reader, Writer};
use super::Metadata;

pub const PSG_MAGIC: &[u8; 4] = b"PSG1";
pub const PSG_VERSION: u32 = 1;

/// Metadata key that records the transform, since the header has no slot for it.
pub const TRANSFORM_KEY: &str = "transform";

const WEIGHT_TOL: f64 = 1e-8;

fn check_weights(rule: &SphereRule) -> Result<()> {
    let total = rule.total_weight();
    let want = sphere_area(rule.dim);
    if (total - want).abs() > WEIGHT_TOL {
        return Err(Error::Malformed(format!("direction weights sum to {total}, expected {want}")));
    }
    Ok(())
}

fn scheme_from(id: u32, l: u32, m: u32, ndir: usize) -> Result<RuleScheme> {
    let (l, m) = (l as usize, m as usize);
    let scheme = match id {
        0 => RuleScheme::Uniform { m },
        1 => RuleScheme::GaussAzimuth { l, m },
        u32::MAX => RuleScheme::Explicit,
        other => return Err(Error::Malformed(format!("unknown direction scheme id {other}"))),
    };
    let expected = match scheme {
        RuleScheme::Uniform { m } => Some(m),
        RuleScheme::GaussAzimuth { l, m } => l.checked_mul(m),
        RuleScheme::Explicit => Some(ndir),
    };
    if expected != Some(ndir) {
        return Err(Error::Malformed(format!("scheme {scheme:?} does not describe {ndir} directions")));
    }
    Ok(scheme)
}

/// Serializes `grid`. The transform name is added to `meta` under [`TRANSFORM_KEY`].
pub fn encode_sinogram(grid: &SinogramGrid, meta: &Metadata) -> Result<Vec<u8>> {
    if grid.values.len() != grid.np * grid.rule.len() || grid.rule.dim != grid.dim {
        return Err(Error::Malformed("sinogram shape is inconsistent".into()));
    }
    check_weights(&grid.rule)?;
    let mut w = Writer::new(PSG_MAGIC, PSG_VERSION);
    w.u32(grid.dim as u32);
    w.u64(grid.np as u64);
    w.u64(grid.rule.len() as u64);
    w.f64(grid.p_max);
    let (l, m) = grid.rule.scheme.params();
    w.u32(grid.rule.scheme.id());
    w.u32(l);
    w.u32(m);
    for (d, wt) in grid.rule.nodes.iter().zip(&grid.rule.weights) {
        w.f64s(d.components());
        w.f64(*wt);
    }
    w.f64s(&grid.values);
    let mut meta = meta.clone();
    meta.set(TRANSFORM_KEY, grid.kind.as_str());
    Ok(w.finish(&meta))
}

/// Parses a PSG1 buffer. A missing transform entry reads as `R`.
pub fn decode_sinogram(bytes: &[u8]) -> Result<(SinogramGrid, Metadata)> {
    let mut r = Reader::open(bytes, PSG_MAGIC, PSG_VERSION)?;
    let dim = r.u32()? as usize;
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let np = to_usize(r.u64()?, "Np")?;
    let ndir = to_usize(r.u64()?, "Ndir")?;
    let p_max = r.f64()?;
    if !(p_max > 0.0 && p_max.is_finite()) || np == 0 {
        return Err(Error::Malformed(format!("bad p grid: Np = {np}, p_max = {p_max}")));
    }
    let (id, l, m) = (r.u32()?, r.u32()?, r.u32()?);
    let scheme = scheme_from(id, l, m, ndir)?;

    let records = ndir.checked_mul(dim + 1).ok_or_else(|| Error::Malformed("direction count overflows".into()))?;
    let raw = r.f64s(records)?;
    let mut nodes = Vec::with_capacity(ndir);
    let mut weights = Vec::with_capacity(ndir);
    for rec in raw.chunks_exact(dim + 1) {
        nodes.push(Direction::from_unit_components(&rec[..dim]).map_err(|e| Error::Malformed(e.to_string()))?);
        weights.push(rec[dim]);
    }
    let rule = SphereRule { dim, nodes, weights, scheme };
    check_weights(&rule)?;

    let count = np.checked_mul(ndir).ok_or_else(|| Error::Malformed("value count overflows".into()))?;
    let values = r.f64s(count)?;
    let meta = r.finish()?;
    let kind = match meta.get(TRANSFORM_KEY) {
        None => TransformKind::R,
        Some(s) => TransformKind::parse(s).ok_or_else(|| Error::Malformed(format!("unknown transform `{s}`")))?,
    };
    Ok((SinogramGrid { dim, kind, p_max, np, rule, values }, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_rule;

    fn sample(dim: usize) -> SinogramGrid {
        let rule = if dim == 2 { sphere_rule(2, 0, 6).unwrap() } else { sphere_rule(3, 3, 4).unwrap() };
        SinogramGrid::from_fn(TransformKind::M, 1.5, 5, rule, |p, w| p.sin() * w.components()[0] - 1e-300)
    }

    #[test]
    fn byte_layout_matches_the_header_description() {
        let g = sample(3);
        let bytes = encode_sinogram(&g, &Metadata::default()).unwrap();
        let header = 4 + 4 + 4 + 8 + 8 + 8 + 12;
        let body = 12 * 4 * 8 + 12 * 5 * 8;
        let meta = "transform=M\n";
        assert_eq!(bytes.len(), header + body + 8 + meta.len());
        assert_eq!(&bytes[..4], b"PSG1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 3);
        assert!(bytes.ends_with(meta.as_bytes()));
    }

    #[test]
    fn round_trip_is_exact() {
        for dim in [2, 3] {
            let g = sample(dim);
            let meta = Metadata::default().with("command", "parafbp forward --dim 3");
            let bytes = encode_sinogram(&g, &meta).unwrap();
            let (back, m) = decode_sinogram(&bytes).unwrap();
            assert_eq!(back, g);
            assert_eq!(m.get("command"), Some("parafbp forward --dim 3"));
            assert_eq!(encode_sinogram(&back, &m).unwrap(), bytes);
        }
    }

    #[test]
    fn malformed_inputs_get_distinct_errors() {
        let bytes = encode_sinogram(&sample(2), &Metadata::default()).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode_sinogram(&bad), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4] = 2;
        assert!(matches!(decode_sinogram(&bad), Err(Error::UnsupportedVersion(2))));
        for cut in [3, 20, 60, bytes.len() - 1] {
            assert!(matches!(decode_sinogram(&bytes[..cut]), Err(Error::Truncated { .. })), "cut {cut}");
        }
        let mut bad = bytes.clone();
        bad.push(0);
        assert!(matches!(decode_sinogram(&bad), Err(Error::TrailingBytes(1))));
    }

    #[test]
    fn weights_must_cover_the_sphere() {
        let mut g = sample(2);
        g.rule.weights[0] *= 1.5;
        assert!(matches!(encode_sinogram(&g, &Metadata::default()), Err(Error::Malformed(_))));
    }

    #[test]
    fn huge_header_counts_fail_cleanly() {
        let mut bytes = encode_sinogram(&sample(2), &Metadata::default()).unwrap();
        bytes[12..20].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_sinogram(&bytes).is_err());
    }
}
