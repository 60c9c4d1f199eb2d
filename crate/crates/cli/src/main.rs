//! `parafbp`: phantoms, forward transforms, reconstruction and verification
//! from the command line.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when a
//! verification check fails.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use paraboloid_fbp::framework::ThetaProbeResult;
use paraboloid_fbp::interface::{
    image_csv, read_sinogram, sinogram_csv, write_image, write_sinogram, Metadata, TRANSFORM_KEY,
};
use paraboloid_fbp::inversion::{
    reconstruct, DataKind, FilterKind, ImageGeometry, ImageGrid, Interpolation, ReconstructionConfig,
};
use paraboloid_fbp::phantom::PhantomSpec;
use paraboloid_fbp::transforms::{forward_sinogram, QuadParams, SinogramParams, TransformKind};
use paraboloid_fbp::verify::{
    convergence_study, run_suite, theta_probe_table, SuiteConfig, VerificationReport, STUDIES, SUITES,
};
use paraboloid_fbp::Error;

#[derive(Parser, Debug)]
#[command(name = "parafbp", version, about = "Transforms over confocal paraboloids and their inversion")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a phantom on a pixel grid and write a PBI1 image.
    Phantom(PhantomArgs),
    /// Sample a forward transform and write a PSG1 sinogram.
    Forward(ForwardArgs),
    /// Filter and back-project a PSG1 sinogram into a PBI1 image.
    Reconstruct(ReconstructArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Run a convergence study.
    Convergence(ConvergenceArgs),
}

#[derive(Args, Debug)]
struct PhantomSource {
    /// Phantom spec file (TOML); defaults to the centered unit polybump.
    #[arg(long)]
    phantom: Option<PathBuf>,
}

impl PhantomSource {
    fn load(&self, dim: usize) -> Result<PhantomSpec, Error> {
        let spec = match &self.phantom {
            Some(path) => PhantomSpec::from_toml_str(&std::fs::read_to_string(path)?)?,
            None => PhantomSpec::centered_polybump(dim),
        };
        if spec.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: spec.dim });
        }
        Ok(spec)
    }
}

#[derive(Args, Debug)]
struct PhantomArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: u8,
    #[command(flatten)]
    source: PhantomSource,
    /// Pixels per axis.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Half the side of the imaged cube.
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    /// Pixels closer than this to the origin are stored as NaN.
    #[arg(long, default_value_t = 0.0)]
    rmin: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the pixels as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Also write the phantom spec as TOML.
    #[arg(long)]
    emit_spec: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TransformArg {
    #[value(name = "R")]
    R,
    #[value(name = "M")]
    M,
    #[value(name = "Mb")]
    Mb,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::R => TransformKind::R,
            TransformArg::M => TransformKind::M,
            TransformArg::Mb => TransformKind::Mb,
        }
    }
}

#[derive(Args, Debug)]
struct ForwardArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: u8,
    #[arg(long, value_enum)]
    transform: TransformArg,
    #[command(flatten)]
    source: PhantomSource,
    #[arg(long, default_value_t = 256)]
    p_samples: usize,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    /// Gauss-Legendre polar order (3D only).
    #[arg(long, default_value_t = 24)]
    dirs_polar: usize,
    /// Azimuth count, or the number of angles in 2D.
    #[arg(long, default_value_t = 48)]
    dirs_azimuth: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FilterArg {
    Palamodov,
    Cormack,
    HilbertPv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DataKindArg {
    #[value(name = "R")]
    R,
    #[value(name = "M")]
    M,
}

#[derive(Args, Debug)]
struct ReconstructArgs {
    /// PSG1 sinogram to invert.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    filter: FilterArg,
    /// Data kind; defaults to the transform recorded in the sinogram.
    #[arg(long, value_enum)]
    data_kind: Option<DataKindArg>,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    #[arg(long, default_value_t = 1e-3)]
    rmin: f64,
    /// Profile interpolation for the spatial filters.
    #[arg(long, default_value_t = false)]
    linear: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = SuiteConfig::default().seed)]
    seed: u64,
    /// Include the volume reconstructions.
    #[arg(long)]
    full: bool,
    /// CSV report destination.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Θ probe rows as CSV (theta suite).
    #[arg(long)]
    probe_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[arg(long)]
    op: String,
    /// Comma-separated refinement levels; defaults to the built-in ladder.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<usize>>,
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Argument vector with `--threads` removed, for embedding in artifacts.
fn recorded_command() -> String {
    let mut out = Vec::new();
    let mut skip = false;
    for (i, a) in std::env::args().enumerate() {
        if i == 0 {
            out.push("parafbp".to_string());
        } else if skip {
            skip = false;
        } else if a == "--threads" {
            skip = true;
        } else if !a.starts_with("--threads=") {
            out.push(if a.contains(char::is_whitespace) { format!("'{a}'") } else { a });
        }
    }
    out.join(" ")
}

fn metadata() -> Metadata {
    Metadata::default()
        .with("command", &recorded_command())
        .with("producer", concat!("parafbp ", env!("CARGO_PKG_VERSION")))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    Ok(std::fs::write(path, text)?)
}

fn run_phantom(a: &PhantomArgs) -> Result<ExitCode, Error> {
    let dim = a.dim as usize;
    let spec = a.source.load(dim)?;
    let geometry = ImageGeometry::centered(dim, a.grid, a.half_width, a.rmin)?;
    let values = (0..geometry.len())
        .map(|i| if geometry.is_excluded(i) { f64::NAN } else { spec.eval(&geometry.point(i)) })
        .collect();
    let image = ImageGrid { geometry, values };
    write_image(&a.out, &image, &metadata())?;
    if let Some(p) = &a.csv {
        write_text(p, &image_csv(&image))?;
    }
    if let Some(p) = &a.emit_spec {
        write_text(p, &spec.to_toml_string())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_forward(a: &ForwardArgs) -> Result<ExitCode, Error> {
    let spec = a.source.load(a.dim as usize)?;
    let params = SinogramParams {
        np: a.p_samples,
        p_max: a.p_max,
        polar: a.dirs_polar,
        azimuth: a.dirs_azimuth,
        quad: QuadParams::default(),
    };
    let sino = forward_sinogram(&spec, a.transform.into(), &params)?;
    write_sinogram(&a.out, &sino, &metadata())?;
    if let Some(p) = &a.csv {
        write_text(p, &sinogram_csv(&sino))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn filter_kind(filter: FilterArg, dim: usize, data: DataKind) -> Result<FilterKind, Error> {
    Ok(match (filter, dim) {
        (FilterArg::Cormack, 3) => FilterKind::Cormack3d,
        (FilterArg::Palamodov, 3) => FilterKind::Palamodov3d(data),
        // the planar filter is the principal-value one
        (FilterArg::Palamodov | FilterArg::HilbertPv, 2) => FilterKind::Palamodov2d(data),
        (FilterArg::Cormack, found) => return Err(Error::DimensionMismatch { expected: 3, found }),
        (FilterArg::HilbertPv, found) => return Err(Error::DimensionMismatch { expected: 2, found }),
        (FilterArg::Palamodov, d) => return Err(Error::UnsupportedDimension(d)),
    })
}

fn run_reconstruct(a: &ReconstructArgs) -> Result<ExitCode, Error> {
    let (sino, meta) = read_sinogram(&a.input)?;
    let recorded = match sino.kind {
        TransformKind::R => Some(DataKind::R),
        TransformKind::M => Some(DataKind::M),
        TransformKind::Mb => None,
    };
    let data = match (a.data_kind, recorded) {
        (Some(DataKindArg::R), _) => DataKind::R,
        (Some(DataKindArg::M), _) => DataKind::M,
        (None, Some(d)) => d,
        (None, None) => {
            return Err(Error::InvalidParameter(format!(
                "sinogram holds {} data, which no filter consumes",
                meta.get(TRANSFORM_KEY).unwrap_or("Mb")
            )))
        }
    };
    if recorded.is_some_and(|r| r != data) {
        return Err(Error::InvalidParameter(format!(
            "--data-kind {} contradicts the sinogram's transform {}",
            data.as_str(),
            sino.kind.as_str()
        )));
    }
    let filter = filter_kind(a.filter, sino.dim, data)?;
    let cfg = ReconstructionConfig {
        interpolation: if a.linear { Interpolation::Linear } else { Interpolation::Cubic },
        r_min: a.rmin,
        ..ReconstructionConfig::new(filter)
    };
    let geometry = ImageGeometry::centered(sino.dim, a.grid, a.half_width, a.rmin)?;
    let image = reconstruct(&sino, &cfg, &geometry)?;
    let mut out_meta = metadata().with("filter", filter.name());
    if let Some(src) = meta.get("command") {
        out_meta.set("sinogram_command", src);
    }
    write_image(&a.out, &image, &out_meta)?;
    if let Some(p) = &a.csv {
        write_text(p, &image_csv(&image))?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Prints every report, writes the combined CSV and maps failures to exit 2.
fn finish_reports(reports: &[VerificationReport], csv: Option<&Path>) -> Result<ExitCode, Error> {
    for r in reports {
        print!("{}", r.to_text());
    }
    if let Some(path) = csv {
        let mut text = String::from(VerificationReport::CSV_HEADER);
        text.push('\n');
        for r in reports {
            text.extend(r.to_csv().lines().skip(1).flat_map(|l| [l, "\n"]));
        }
        write_text(path, &text)?;
    }
    let failed: usize = reports.iter().map(|r| r.failures().count()).sum();
    if failed > 0 {
        eprintln!("{failed} check(s) failed");
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn run_verify(a: &VerifyArgs) -> Result<ExitCode, Error> {
    let cfg = SuiteConfig { seed: a.seed, full: a.full };
    let names: Vec<&str> = if a.suite == "all" { SUITES.to_vec() } else { vec![a.suite.as_str()] };
    let reports = names.iter().map(|n| run_suite(n, &cfg)).collect::<Result<Vec<_>, _>>()?;
    if let Some(path) = &a.probe_csv {
        let mut text = format!("{}\n", ThetaProbeResult::CSV_HEADER);
        for row in theta_probe_table()? {
            text.push_str(&row.csv_row());
            text.push('\n');
        }
        write_text(path, &text)?;
    }
    finish_reports(&reports, a.report.as_deref())
}

fn run_convergence(a: &ConvergenceArgs) -> Result<ExitCode, Error> {
    let ladder: Vec<usize> = match &a.ladder {
        Some(l) => l.clone(),
        None => STUDIES
            .iter()
            .find(|(op, _)| *op == a.op)
            .map(|(_, l)| l.to_vec())
            .ok_or_else(|| Error::UnknownSuite(format!("convergence op {}", a.op)))?,
    };
    let report = convergence_study(&a.op, &ladder)?;
    finish_reports(&[report], a.report.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Phantom(a) => run_phantom(a),
        Command::Forward(a) => run_forward(a),
        Command::Reconstruct(a) => run_reconstruct(a),
        Command::Verify(a) => run_verify(a),
        Command::Convergence(a) => run_convergence(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
