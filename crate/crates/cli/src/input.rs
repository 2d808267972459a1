//! JSON input files.
//!
//! Complex numbers are `[re, im]` pairs; indices are 0-based. Parse errors
//! carry `line:column`, semantic errors the line of the offending key.

use std::path::{Path, PathBuf};

use mu_uncertainty::continuum::{
    ExplicitLevels, GaussianInBox, Grid, GridWaveFunction, HalfBox, RefinableProblem,
    RefinementLevel, DENSITY_NORM_TOL,
};
use mu_uncertainty::density::DensityOptions;
use mu_uncertainty::state::{Metric, MeasurementSetup, NORM_TOL};
use mu_uncertainty::sum::fsum;
use mu_uncertainty::{
    DensityMatrix, Error, OrthogonalDecomposition, OrthonormalBasis, ProbabilityVector,
    PureState, WeightVector,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::args::TolKey;
use crate::error::{CliError, CliResult};

type Pair = [f64; 2];

fn complex([re, im]: Pair) -> Complex64 {
    Complex64::new(re, im)
}

/// Validation tolerances after applying `--tol` overrides.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tolerances {
    /// Overrides both the state and the grid normalization tolerance.
    pub norm: Option<f64>,
    pub density: DensityOptions,
}

impl Tolerances {
    pub fn from_overrides(overrides: &[(TolKey, f64)]) -> Self {
        let mut t = Tolerances::default();
        for &(key, v) in overrides {
            match key {
                TolKey::Norm => t.norm = Some(v),
                TolKey::Hermitian => t.density.hermitian_tol = v,
                TolKey::Trace => t.density.trace_tol = v,
                TolKey::Psd => t.density.psd_tol = v,
            }
        }
        t
    }
}

/// File contents kept around for locating errors.
pub struct Source {
    path: PathBuf,
    text: String,
}

impl Source {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self {
            path: path.to_owned(),
            text,
        })
    }

    #[cfg(test)]
    pub fn from_text(path: &str, text: &str) -> Self {
        Self {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn parse<T: DeserializeOwned>(&self) -> CliResult<T> {
        serde_json::from_str(&self.text).map_err(|e| CliError::Syntax {
            path: self.path.clone(),
            line: e.line(),
            column: e.column(),
            msg: strip_position(&e.to_string()),
        })
    }

    /// 1-based line of the first occurrence of `"key"`, or 1.
    pub fn line_of(&self, key: &str) -> usize {
        let needle = format!("\"{key}\"");
        self.text
            .find(&needle)
            .map(|pos| self.text[..pos].matches('\n').count() + 1)
            .unwrap_or(1)
    }

    pub fn at(&self, key: &str, source: Error) -> CliError {
        CliError::Input {
            path: self.path.clone(),
            line: self.line_of(key),
            source,
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_owned(),
        None => msg.to_owned(),
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    dim: usize,
    amps: Vec<Pair>,
}

pub fn load_state(src: &Source, tol: &Tolerances) -> CliResult<PureState> {
    let f: StateFile = src.parse()?;
    if f.amps.len() != f.dim {
        return Err(src.at(
            "amps",
            Error::DimensionMismatch {
                expected: f.dim,
                found: f.amps.len(),
            },
        ));
    }
    let amps = f.amps.into_iter().map(complex).collect();
    PureState::with_tolerance(amps, tol.norm.unwrap_or(NORM_TOL)).map_err(|e| src.at("amps", e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityFile {
    dim: usize,
    rows: Vec<Vec<Pair>>,
}

pub fn load_density(src: &Source, tol: &Tolerances) -> CliResult<DensityMatrix> {
    let f: DensityFile = src.parse()?;
    let n = f.dim;
    let rows = f.rows;
    if let Some(found) = std::iter::once(rows.len())
        .chain(rows.iter().map(Vec::len))
        .find(|&len| len != n)
    {
        return Err(src.at("rows", Error::DimensionMismatch { expected: n, found }));
    }
    let mat = DMatrix::from_fn(n, n, |i, j| complex(rows[i][j]));
    DensityMatrix::with_options(mat, &tol.density).map_err(|e| src.at("rows", e))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BasisSpec {
    Named(String),
    Rows { rows: Vec<Vec<Pair>> },
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec::Named("identity".into())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionFile {
    #[serde(default)]
    basis: BasisSpec,
    groups: Vec<Vec<usize>>,
    eigtuples: Option<Vec<Vec<f64>>>,
}

/// A decomposition, the basis its indices refer to, and optional block labels.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub decomposition: OrthogonalDecomposition,
    pub basis: OrthonormalBasis,
    pub setup: Option<MeasurementSetup>,
}

/// Loads a decomposition of a `dim`-dimensional space; `None` infers the
/// dimension from the basis or the largest index.
pub fn load_decomposition(src: &Source, dim: Option<usize>) -> CliResult<Decomposition> {
    let f: DecompositionFile = src.parse()?;
    let basis = match f.basis {
        BasisSpec::Named(name) if name == "identity" => None,
        BasisSpec::Named(name) => {
            return Err(src.at(
                "basis",
                invalid(format!("unknown basis {name:?}; expected \"identity\" or {{\"rows\": ...}}")),
            ))
        }
        BasisSpec::Rows { rows } => Some(rows),
    };
    let n = match (dim, &basis) {
        (Some(n), _) => n,
        (None, Some(rows)) => rows.len(),
        (None, None) => f.groups.iter().flatten().max().map_or(0, |&i| i + 1),
    };
    let basis = match basis {
        None => OrthonormalBasis::identity(n),
        Some(rows) => {
            if let Some(found) = std::iter::once(rows.len())
                .chain(rows.iter().map(Vec::len))
                .find(|&len| len != n)
            {
                return Err(src.at("basis", Error::DimensionMismatch { expected: n, found }));
            }
            // Each listed row is one basis vector; the library stores them as columns.
            let mat = DMatrix::from_fn(n, n, |i, j| complex(rows[j][i]));
            OrthonormalBasis::new(mat).map_err(|e| src.at("basis", e))?
        }
    };
    let decomposition =
        OrthogonalDecomposition::new(f.groups, n).map_err(|e| src.at("groups", e))?;
    let setup = f
        .eigtuples
        .map(|t| MeasurementSetup::new(decomposition.clone(), t, Metric::Euclidean))
        .transpose()
        .map_err(|e| src.at("eigtuples", e))?;
    Ok(Decomposition {
        decomposition,
        basis,
        setup,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    d: usize,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    origin: Option<Vec<f64>>,
    values: Vec<Pair>,
}

/// Loads a gridded wave function, checking its Riemann norm against the
/// tolerance and rescaling it to exactly 1.
pub fn load_grid(src: &Source, tol: &Tolerances) -> CliResult<GridWaveFunction> {
    let f: GridFile = src.parse()?;
    if f.shape.len() != f.d {
        return Err(src.at(
            "shape",
            Error::DimensionMismatch {
                expected: f.d,
                found: f.shape.len(),
            },
        ));
    }
    let origin = f.origin.unwrap_or_else(|| vec![0.0; f.d]);
    let grid = Grid::new(f.shape, f.spacing, origin).map_err(|e| src.at("spacing", e))?;
    if f.values.len() != grid.cells() {
        return Err(src.at(
            "values",
            Error::DimensionMismatch {
                expected: grid.cells(),
                found: f.values.len(),
            },
        ));
    }
    let values: Vec<Complex64> = f.values.into_iter().map(complex).collect();
    let norm = fsum(values.iter().map(|z| z.norm_sqr())) * grid.cell_volume();
    if !((norm - 1.0).abs() <= tol.norm.unwrap_or(DENSITY_NORM_TOL)) {
        return Err(src.at("values", Error::NotNormalized { sum: norm }));
    }
    GridWaveFunction::normalized(grid, values).map_err(|e| src.at("values", e))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSpec {
    weights: Vec<f64>,
    spacing: f64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ProblemFile {
    Gaussian {
        lo: f64,
        hi: f64,
        center: f64,
        sigma: f64,
        base_cells: usize,
    },
    HalfBox {
        length: f64,
        base_cells: usize,
    },
    Levels {
        levels: Vec<LevelSpec>,
    },
}

/// A refinement problem and, for explicit ones, how many levels it holds.
pub struct Problem {
    pub problem: Box<dyn RefinableProblem>,
    pub available: Option<usize>,
}

pub fn load_problem(src: &Source) -> CliResult<Problem> {
    let (problem, available): (Box<dyn RefinableProblem>, _) = match src.parse()? {
        ProblemFile::Gaussian {
            lo,
            hi,
            center,
            sigma,
            base_cells,
        } => {
            if !(sigma > 0.0 && hi > lo && base_cells > 0) {
                return Err(src.at(
                    "kind",
                    invalid("gaussian needs sigma > 0, hi > lo and base_cells > 0"),
                ));
            }
            (
                Box::new(GaussianInBox {
                    lo,
                    hi,
                    center,
                    sigma,
                    base_cells,
                }),
                None,
            )
        }
        ProblemFile::HalfBox { length, base_cells } => {
            if !(length > 0.0) {
                return Err(src.at("length", invalid("length must be positive")));
            }
            (Box::new(HalfBox { length, base_cells }), None)
        }
        ProblemFile::Levels { levels } => {
            let levels = levels
                .into_iter()
                .map(|l| {
                    Ok(RefinementLevel {
                        weights: WeightVector::new(l.weights)?,
                        spacing: l.spacing,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()
                .map_err(|e| src.at("levels", e))?;
            let n = levels.len();
            (Box::new(ExplicitLevels(levels)), Some(n))
        }
    };
    problem.level(0).map_err(|e| src.at("kind", e))?;
    Ok(Problem { problem, available })
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MemberSpec {
    Explicit { p: Vec<f64> },
    Uniform { n: usize, uniform_on: usize },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    members: Vec<MemberSpec>,
}

pub fn load_family(src: &Source) -> CliResult<Vec<ProbabilityVector>> {
    let f: FamilyFile = src.parse()?;
    f.members
        .into_iter()
        .map(|m| match m {
            MemberSpec::Explicit { p } => ProbabilityVector::new(p),
            MemberSpec::Uniform { n, uniform_on } => ProbabilityVector::uniform_on(n, uniform_on),
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| src.at("members", e))
}

/// Input file kinds recognized by `check`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    State,
    Density,
    Decomposition,
    Grid,
    Problem,
    Family,
}

impl FileKind {
    pub fn name(self) -> &'static str {
        match self {
            FileKind::State => "state",
            FileKind::Density => "density",
            FileKind::Decomposition => "decomposition",
            FileKind::Grid => "grid",
            FileKind::Problem => "problem",
            FileKind::Family => "family",
        }
    }
}

/// Guesses the kind of a file from its top-level keys.
pub fn detect_kind(src: &Source) -> CliResult<FileKind> {
    let value: serde_json::Value = src.parse()?;
    let has = |k: &str| value.get(k).is_some();
    let kind = if has("amps") {
        FileKind::State
    } else if has("rows") && has("dim") {
        FileKind::Density
    } else if has("groups") {
        FileKind::Decomposition
    } else if has("values") {
        FileKind::Grid
    } else if has("kind") {
        FileKind::Problem
    } else if has("members") {
        FileKind::Family
    } else {
        return Err(src.at("", invalid("unrecognized input file")));
    };
    Ok(kind)
}
