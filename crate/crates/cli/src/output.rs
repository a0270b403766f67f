//! Grid and report serialization. Every file is written to a temporary file
//! in the target directory and renamed into place.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use tempfile::NamedTempFile;
use tricoupler::RealGrid64;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Ppm,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Ppm => "ppm",
        }
    }
}

/// Fails early if `path` could not be created: missing parent directory or
/// a directory in its place.
pub fn check_writable(path: &Path) -> Result<(), CliError> {
    let parent = parent_dir(path);
    if !parent.is_dir() {
        return Err(CliError::Usage(format!("output directory {} does not exist", parent.display())));
    }
    if path.is_dir() {
        return Err(CliError::Usage(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(parent_dir(path)).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s.into_bytes()
}

/// `# x_min,x_max,y_min,y_max,nx,ny,label` then `ny` rows of `nx` values,
/// `y` ascending, 17 significant digits.
pub fn grid_csv(grid: &RealGrid64) -> Vec<u8> {
    let g = &grid.spec;
    let mut s = String::from("# x_min,x_max,y_min,y_max,nx,ny,label\n");
    let _ = writeln!(
        s,
        "# {:.16e},{:.16e},{:.16e},{:.16e},{},{},{}",
        g.x_min,
        g.x_max,
        g.y_min,
        g.y_max,
        g.nx,
        g.ny,
        grid.label.as_str()
    );
    for row in grid.values.chunks(g.nx) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

/// Binary P6 image, top row = largest `y`, gray level `255 v / max`.
pub fn grid_ppm(grid: &RealGrid64) -> Vec<u8> {
    let g = &grid.spec;
    let max = grid.max();
    let mut out = format!("P6\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for row in grid.values.chunks(g.nx).rev() {
        for &v in row {
            let level = if max > 0.0 { (255.0 * v / max).round().clamp(0.0, 255.0) as u8 } else { 0 };
            out.extend_from_slice(&[level, level, level]);
        }
    }
    out
}

pub fn encode_grid(grid: &RealGrid64, format: Format) -> Vec<u8> {
    match format {
        Format::Csv => grid_csv(grid),
        Format::Json => to_json(grid),
        Format::Ppm => grid_ppm(grid),
    }
}

/// `<out>.<tag>.<ext>`
pub fn sibling(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".{tag}.{ext}"));
    out.with_file_name(name)
}
