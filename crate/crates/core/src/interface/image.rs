//! PBI1: reconstructed images.
//!
//! ```text
//! "PBI1" u32 version=1  u32 n
//! n × (u64 count, f64 spacing, f64 origin)
//! f64 r_min
//! values, row-major with the last axis fastest; excluded pixels are NaN
//! u64 metadata length, metadata bytes
//! ```

use crate::error::{Error, Result};
use crate::inversion::{ImageGeometry, ImageGrid};

use super::codec::{to_usize, Reader, Writer};
use super::Metadata;

pub const PBI_MAGIC: &[u8; 4] = b"PBI1";
pub const PBI_VERSION: u32 = 1;

/// Pixels must be finite unless excluded, and excluded pixels must be NaN.
fn check_values(image: &ImageGrid) -> Result<()> {
    let g = &image.geometry;
    if image.values.len() != g.len() {
        return Err(Error::Malformed(format!("{} values for {} pixels", image.values.len(), g.len())));
    }
    for (i, v) in image.values.iter().enumerate() {
        let ok = if g.is_excluded(i) { v.is_nan() } else { v.is_finite() };
        if !ok {
            return Err(Error::Malformed(format!("pixel {i} holds {v}")));
        }
    }
    Ok(())
}

pub fn encode_image(image: &ImageGrid, meta: &Metadata) -> Result<Vec<u8>> {
    check_values(image)?;
    let g = &image.geometry;
    let mut w = Writer::new(PBI_MAGIC, PBI_VERSION);
    w.u32(g.dim as u32);
    for a in 0..g.dim {
        w.u64(g.counts[a] as u64);
        w.f64(g.spacing[a]);
        w.f64(g.origin[a]);
    }
    w.f64(g.r_min);
    w.f64s(&image.values);
    Ok(w.finish(meta))
}

pub fn decode_image(bytes: &[u8]) -> Result<(ImageGrid, Metadata)> {
    let mut r = Reader::open(bytes, PBI_MAGIC, PBI_VERSION)?;
    let dim = r.u32()? as usize;
    if dim != 2 && dim != 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    // planar images keep a unit third axis, as built by `ImageGeometry::centered`
    let mut geometry = ImageGeometry { dim, counts: [1; 3], spacing: [1.0, 1.0, 1.0], origin: [0.0; 3], r_min: 0.0 };
    for a in 0..dim {
        geometry.counts[a] = to_usize(r.u64()?, "pixel count")?;
        geometry.spacing[a] = r.f64()?;
        geometry.origin[a] = r.f64()?;
    }
    geometry.r_min = r.f64()?;
    let len = geometry
        .counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .ok_or_else(|| Error::Malformed("pixel count overflows".into()))?;
    let values = r.f64s(len)?;
    let meta = r.finish()?;
    let image = ImageGrid { geometry, values };
    check_values(&image)?;
    Ok((image, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dim: usize) -> ImageGrid {
        let geometry = ImageGeometry::centered(dim, 5, 1.0, 0.3).unwrap();
        let values = (0..geometry.len())
            .map(|i| if geometry.is_excluded(i) { f64::NAN } else { (i as f64).sqrt() - 1.25 })
            .collect();
        ImageGrid { geometry, values }
    }

    fn bits(v: &[f64]) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn round_trip_is_bitwise() {
        for dim in [2, 3] {
            let img = sample(dim);
            let bytes = encode_image(&img, &Metadata::default().with("seed", "4")).unwrap();
            let (back, meta) = decode_image(&bytes).unwrap();
            assert_eq!(back.geometry, img.geometry);
            assert_eq!(bits(&back.values), bits(&img.values));
            assert_eq!(meta.get("seed"), Some("4"));
            assert_eq!(encode_image(&back, &meta).unwrap(), bytes);
        }
    }

    #[test]
    fn planar_header_has_two_axes() {
        let bytes = encode_image(&sample(2), &Metadata::default()).unwrap();
        assert_eq!(bytes.len(), 12 + 2 * 24 + 8 + 25 * 8 + 8);
    }

    #[test]
    fn excluded_pixels_must_be_nan() {
        let mut img = sample(2);
        img.values[12] = 0.0;
        assert!(matches!(encode_image(&img, &Metadata::default()), Err(Error::Malformed(_))));
        let mut img = sample(2);
        img.values[0] = f64::INFINITY;
        assert!(encode_image(&img, &Metadata::default()).is_err());
    }

    #[test]
    fn malformed_inputs_get_distinct_errors() {
        let bytes = encode_image(&sample(3), &Metadata::default()).unwrap();
        assert!(matches!(decode_image(b"PSG1\x01\0\0\0"), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4..8].copy_from_slice(&9u32.to_le_bytes());
        assert!(matches!(decode_image(&bad), Err(Error::UnsupportedVersion(9))));
        assert!(matches!(decode_image(&bytes[..bytes.len() - 3]), Err(Error::Truncated { .. })));
        let mut bad = bytes;
        bad.extend_from_slice(b"xx");
        assert!(matches!(decode_image(&bad), Err(Error::TrailingBytes(2))));
    }
}
