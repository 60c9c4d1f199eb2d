//! On-disk containers and text exports.
//!
//! Both binary formats are little-endian throughout and end in a metadata
//! block: a `u64` byte length followed by UTF-8 `key=value` lines. Writers
//! record the producing command there so an artifact can be regenerated.

mod codec;
mod image;
mod sinogram;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::inversion::ImageGrid;
use crate::transforms::SinogramGrid;

pub use image::{decode_image, encode_image, PBI_MAGIC, PBI_VERSION};
pub use sinogram::{decode_sinogram, encode_sinogram, PSG_MAGIC, PSG_VERSION, TRANSFORM_KEY};

/// Key/value provenance stored at the end of every artifact. Keys are sorted,
/// so encoding is canonical.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metadata {
    entries: BTreeMap<String, String>,
}

impl Metadata {
    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.set(key, value);
        self
    }

    /// Newlines in values become spaces; keys may not contain `=` or newlines.
    pub fn set(&mut self, key: &str, value: &str) {
        assert!(!key.is_empty() && !key.contains(['=', '\n']), "bad metadata key {key:?}");
        self.entries.insert(key.to_string(), value.replace('\n', " "));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn to_text(&self) -> String {
        self.entries.iter().fold(String::new(), |mut s, (k, v)| {
            let _ = writeln!(s, "{k}={v}");
            s
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .filter(|(k, _)| !k.is_empty())
                .ok_or_else(|| Error::Malformed(format!("metadata line without key: {line:?}")))?;
            entries.insert(k.to_string(), v.to_string());
        }
        Ok(Self { entries })
    }
}

pub fn write_sinogram(path: &Path, grid: &SinogramGrid, meta: &Metadata) -> Result<()> {
    Ok(std::fs::write(path, encode_sinogram(grid, meta)?)?)
}

pub fn read_sinogram(path: &Path) -> Result<(SinogramGrid, Metadata)> {
    decode_sinogram(&std::fs::read(path)?)
}

pub fn write_image(path: &Path, image: &ImageGrid, meta: &Metadata) -> Result<()> {
    Ok(std::fs::write(path, encode_image(image, meta)?)?)
}

pub fn read_image(path: &Path) -> Result<(ImageGrid, Metadata)> {
    decode_image(&std::fs::read(path)?)
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per sample: direction components, weight, `p`, value.
pub fn sinogram_csv(grid: &SinogramGrid) -> String {
    let axes: Vec<String> = (0..grid.dim).map(|a| format!("w{a}")).collect();
    let mut out = format!("{},weight,p,value\n", axes.join(","));
    let ps = grid.p_samples();
    for (k, (d, wt)) in grid.rule.nodes.iter().zip(&grid.rule.weights).enumerate() {
        let lead: Vec<String> = d.components().iter().map(|c| num(*c)).collect();
        let lead = format!("{},{}", lead.join(","), num(*wt));
        for (p, v) in ps.iter().zip(grid.row(k)) {
            let _ = writeln!(out, "{lead},{},{}", num(*p), num(*v));
        }
    }
    out
}

/// One row per pixel: coordinates then value. Excluded pixels print `NaN`.
pub fn image_csv(image: &ImageGrid) -> String {
    let g = &image.geometry;
    let axes: Vec<String> = (0..g.dim).map(|a| format!("x{a}")).collect();
    let mut out = format!("{},value\n", axes.join(","));
    for (i, v) in image.values.iter().enumerate() {
        let x = g.point(i);
        let cells: Vec<String> = x[..g.dim].iter().map(|c| num(*c)).collect();
        let _ = writeln!(out, "{},{}", cells.join(","), num(*v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sphere_rule;
    use crate::inversion::ImageGeometry;
    use crate::transforms::TransformKind;

    #[test]
    fn metadata_text_round_trip() {
        let m = Metadata::default().with("b", "x=y").with("a", "two\nlines");
        assert_eq!(m.to_text(), "a=two lines\nb=x=y\n");
        assert_eq!(Metadata::parse(&m.to_text()).unwrap(), m);
        assert!(Metadata::parse("novalue\n").is_err());
    }

    #[test]
    fn csv_values_parse_back_exactly() {
        let rule = sphere_rule(2, 0, 3).unwrap();
        let g = SinogramGrid::from_fn(TransformKind::R, 1.0, 2, rule, |p, w| p / 3.0 + w.components()[1]);
        let csv = sinogram_csv(&g);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "w0,w1,weight,p,value");
        assert_eq!(lines.len(), 7);
        let parsed: Vec<f64> = lines[1..].iter().map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(parsed, g.values);

        let geometry = ImageGeometry::centered(3, 2, 1.0, 0.0).unwrap();
        let img = ImageGrid { values: vec![0.1; geometry.len()], geometry };
        let csv = image_csv(&img);
        assert!(csv.starts_with("x0,x1,x2,value\n-5.0000000000000000e-1,"));
        assert_eq!(csv.lines().count(), 9);
    }

    #[test]
    fn files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.psg");
        let rule = sphere_rule(3, 2, 3).unwrap();
        let g = SinogramGrid::from_fn(TransformKind::Mb, 1.0, 4, rule, |p, _| p);
        write_sinogram(&path, &g, &Metadata::default()).unwrap();
        let (back, meta) = read_sinogram(&path).unwrap();
        assert_eq!(back, g);
        assert_eq!(meta.get(TRANSFORM_KEY), Some("Mb"));
        assert!(matches!(read_sinogram(&dir.path().join("missing")), Err(Error::Io(_))));
    }
}
