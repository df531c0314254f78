//! File access and the mapping from library errors to exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use trajmap_core::eval::EvalError;
use trajmap_core::formats::{write_atomic, FormatError};
use trajmap_core::geo::{to_geodetic, to_planar, GeoError};
use trajmap_core::polyfit::FitError;
use trajmap_core::routing::RoutingError;
use trajmap_core::synth::SynthError;
use trajmap_core::trajectory::TrajectoryError;
use trajmap_core::{Geo, MapError, Point};

pub const USAGE: u8 = 2;
pub const DATA: u8 = 3;
pub const NUMERICAL: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: USAGE,
            msg: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            code: DATA,
            msg: msg.into(),
        }
    }

    /// Prefixes the message with the file it concerns.
    pub fn at(mut self, path: &Path) -> Self {
        self.msg = format!("{}: {}", path.display(), self.msg);
        self
    }
}

fn fit_code(_: &FitError) -> u8 {
    NUMERICAL
}

fn map_code(e: &MapError) -> u8 {
    match e {
        MapError::Fit { source, .. } => fit_code(source),
        MapError::InvalidInput(_) => USAGE,
        _ => DATA,
    }
}

impl From<MapError> for Failure {
    fn from(e: MapError) -> Self {
        Self {
            code: map_code(&e),
            msg: e.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let code = match &e {
            FormatError::Map(m) => map_code(m),
            _ => DATA,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<GeoError> for Failure {
    fn from(e: GeoError) -> Self {
        Self::data(e.to_string())
    }
}

impl From<TrajectoryError> for Failure {
    fn from(e: TrajectoryError) -> Self {
        let code = match &e {
            TrajectoryError::Fit(f) => fit_code(f),
            TrajectoryError::InvalidInput(_) => USAGE,
            _ => DATA,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<RoutingError> for Failure {
    fn from(e: RoutingError) -> Self {
        let code = match &e {
            RoutingError::InvalidInput(_) => USAGE,
            _ => DATA,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Map(m) => m.into(),
            other => Self::data(other.to_string()),
        }
    }
}

impl From<SynthError> for Failure {
    fn from(e: SynthError) -> Self {
        let code = match &e {
            SynthError::Routing(RoutingError::InvalidInput(_)) => USAGE,
            _ => DATA,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, content: impl AsRef<[u8]>) -> Result<(), Failure> {
    write_atomic(path, content.as_ref())
        .map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::data(format!("cannot create {}: {e}", path.display())))
}

/// `*.txt` files of a directory, sorted by name.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::data(format!("cannot read {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|e| Failure::data(format!("cannot read {}: {e}", dir.display())))?
            .path();
        if path.is_file() && path.extension().is_some_and(|x| x == "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// File stem, used as the trace key in label files.
pub fn trace_name(path: &Path) -> Result<String, Failure> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    if stem.is_empty() || stem.contains(',') || stem.contains('#') {
        return Err(Failure::data(format!(
            "{}: trace names must be non-empty and free of `,` and `#`",
            path.display()
        )));
    }
    Ok(stem.to_string())
}

/// Moves a planar point from the frame anchored at `from` to the one at `to`.
pub fn reframe(p: Point, from: Geo, to: Geo) -> Result<Point, Failure> {
    if from == to {
        return Ok(p);
    }
    Ok(to_planar(to_geodetic(p, from)?, to)?)
}
