//! Experiment configuration: TOML on disk, validated into library objects
//! before any command runs.

use std::fmt;
use std::ops::Range;

use nevlab::nevanlinna::{RGrid, DEFAULT_QUADRATURE};
use nevlab::projgeom::{Hyperplane, HyperplaneSystem, PositionCertificate, ProjectiveMap};
use nevlab::{parse_complex, parse_expr, Complex64, Expr};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::Command;

/// A config problem, located in the source when possible.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub position: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some((line, col)) => write!(f, "{}:{line}:{col}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A number or a complex literal such as `"1/2-3i"`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn to_complex(&self) -> Result<Complex64, String> {
        match self {
            Scalar::Int(v) => Ok(Complex64::new(*v as f64, 0.0)),
            Scalar::Float(v) => Ok(Complex64::new(*v, 0.0)),
            Scalar::Text(s) => parse_complex(s).map_err(|e| e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    #[default]
    Log,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_min: 5.0,
            r_max: 40.0,
            count: 12,
            spacing: Spacing::Log,
        }
    }
}

/// Command-specific knobs; each command reads the ones it needs.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// `α > 1` in the logarithmic difference bound.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// `0 < δ < 1` in the logarithmic difference bound.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Function for `logdiff`; defaults to the last mapping component.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<Spanned<String>>,
    /// Summands for `partition`; defaults to the mapping components.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<Spanned<String>>,
    /// Random matrices tried by `casorati`.
    #[serde(default = "default_transforms")]
    pub transforms: usize,
    /// Hyperplane labels, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
}

fn default_alpha() -> f64 {
    2.0
}

fn default_delta() -> f64 {
    0.5
}

fn default_transforms() -> usize {
    10
}

impl Default for Options {
    fn default() -> Self {
        Options {
            alpha: default_alpha(),
            delta: default_delta(),
            function: None,
            functions: Vec::new(),
            transforms: default_transforms(),
            labels: Vec::new(),
        }
    }
}

fn default_c() -> Spanned<Scalar> {
    Spanned::new(0..0, Scalar::Int(1))
}

fn default_seed() -> u64 {
    2024
}

fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE
}

/// The file as written, plus command-line overrides. Serialized verbatim
/// into the run manifest.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub mapping: Vec<Spanned<String>>,
    #[serde(default)]
    pub hyperplanes: Vec<Spanned<Vec<Scalar>>>,
    #[serde(default = "default_c")]
    pub c: Spanned<Scalar>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<Spanned<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Spanned<usize>>,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub options: Options,
}

/// Flag values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_points: Option<usize>,
    pub quadrature: Option<usize>,
}

/// A validated experiment, ready for dispatch.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub map: Option<ProjectiveMap>,
    pub system: Option<HyperplaneSystem>,
    pub c: Complex64,
    pub grid: RGrid,
    pub seed: u64,
    /// `logdiff` target.
    pub function: Option<Expr>,
    /// `partition` summands.
    pub functions: Vec<Expr>,
}

struct Locator<'a> {
    path: &'a str,
    source: &'a str,
}

impl Locator<'_> {
    fn at(&self, span: Option<Range<usize>>, message: impl Into<String>) -> ConfigError {
        let position = span.filter(|s| s.end > 0).map(|s| {
            let before = &self.source[..s.start.min(self.source.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            (line, col)
        });
        ConfigError {
            path: self.path.to_string(),
            position,
            message: message.into(),
        }
    }
}

fn parse_spanned_expr(loc: &Locator<'_>, s: &Spanned<String>) -> Result<Expr, ConfigError> {
    parse_expr(s.get_ref()).map_err(|e| loc.at(Some(s.span()), format!("cannot parse `{}`: {e}", s.get_ref())))
}

fn build_grid(spec: &GridSpec, k: usize) -> Result<RGrid, String> {
    let result = match spec.spacing {
        Spacing::Log => RGrid::geometric(spec.r_min, spec.r_max, spec.count, k),
        Spacing::Linear => {
            if spec.count < 2 {
                return Err("grid.count must be at least 2".into());
            }
            let step = (spec.r_max - spec.r_min) / (spec.count - 1) as f64;
            let mut radii: Vec<f64> = (0..spec.count).map(|i| spec.r_min + step * i as f64).collect();
            radii[spec.count - 1] = spec.r_max;
            RGrid::new(radii, k)
        }
    };
    result.map_err(|e| e.to_string())
}

/// Parses and validates `source` for `command`. Every cross-field constraint
/// the command relies on is checked here.
pub fn load(
    path: &str,
    source: &str,
    command: Command,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let loc = Locator { path, source };
    let mut raw: RawConfig = toml::from_str(source).map_err(|e| loc.at(e.span(), e.message().trim().to_string()))?;
    if let Some(seed) = overrides.seed {
        raw.seed = seed;
    }
    if let Some(count) = overrides.grid_points {
        raw.grid.count = count;
    }
    if let Some(k) = overrides.quadrature {
        raw.quadrature = k;
    }

    let components = raw
        .mapping
        .iter()
        .map(|s| parse_spanned_expr(&loc, s))
        .collect::<Result<Vec<_>, _>>()?;
    let c = raw
        .c
        .get_ref()
        .to_complex()
        .map_err(|e| loc.at(Some(raw.c.span()), e))?;
    if c.norm() == 0.0 {
        return Err(loc.at(Some(raw.c.span()), "shift offset c must be nonzero"));
    }

    // n from the mapping, else from the hyperplane rows, else as declared
    let inferred = if !components.is_empty() {
        Some(components.len() - 1)
    } else {
        raw.hyperplanes.first().map(|row| row.get_ref().len().saturating_sub(1))
    };
    let n = match (&raw.n, inferred) {
        (Some(d), Some(i)) if *d.get_ref() != i => {
            return Err(loc.at(
                Some(d.span()),
                format!("n = {} but the mapping has {} components", d.get_ref(), i + 1),
            ));
        }
        (Some(d), _) => *d.get_ref(),
        (None, Some(i)) => i,
        (None, None) => 0,
    };
    let big_n = raw.big_n.as_ref().map_or(n, |v| *v.get_ref());
    if big_n < n {
        let span = raw.big_n.as_ref().map(|v| v.span());
        return Err(loc.at(span, format!("N = {big_n} is below n = {n}")));
    }

    let map = if components.is_empty() {
        None
    } else {
        let span = raw.mapping.first().map(|s| s.span());
        Some(ProjectiveMap::new(components.clone(), c).map_err(|e| loc.at(span, e.to_string()))?)
    };

    let mut planes = Vec::with_capacity(raw.hyperplanes.len());
    for (j, row) in raw.hyperplanes.iter().enumerate() {
        if row.get_ref().len() != n + 1 {
            return Err(loc.at(
                Some(row.span()),
                format!(
                    "hyperplane {j} has {} coefficients, expected n + 1 = {}",
                    row.get_ref().len(),
                    n + 1
                ),
            ));
        }
        let coeffs = row
            .get_ref()
            .iter()
            .map(Scalar::to_complex)
            .collect::<Result<Vec<_>, _>>();
        let coeffs = coeffs.map_err(|e| loc.at(Some(row.span()), e))?;
        let label = raw.options.labels.get(j).cloned().unwrap_or_else(|| format!("H{j}"));
        planes.push(Hyperplane::new(coeffs, label).map_err(|e| loc.at(Some(row.span()), e.to_string()))?);
    }
    let planes_span = raw.hyperplanes.first().map(|r| r.span());
    let system = if planes.is_empty() {
        None
    } else {
        Some(HyperplaneSystem::new(planes, big_n).map_err(|e| loc.at(planes_span.clone(), e.to_string()))?)
    };

    if command.needs_mapping() && map.is_none() {
        return Err(loc.at(None, format!("`{}` needs a `mapping`", command.name())));
    }
    if command.needs_hyperplanes() && system.is_none() {
        return Err(loc.at(None, format!("`{}` needs `hyperplanes`", command.name())));
    }
    if let Some(sys) = system.as_ref().filter(|_| command.needs_theorem_hypotheses()) {
        let bound = 2 * big_n as i64 - n as i64 + 1;
        if sys.q() as i64 <= bound {
            return Err(loc.at(
                planes_span.clone(),
                format!("hypothesis q(>2N-n+1) fails: q = {}, 2N-n+1 = {bound}", sys.q()),
            ));
        }
        if let PositionCertificate::Fail { witness, rank } = sys.check_subgeneral() {
            return Err(loc.at(
                planes_span,
                format!("hyperplanes are not in {big_n}-subgeneral position: planes {witness:?} have rank {rank}"),
            ));
        }
    }

    let grid = build_grid(&raw.grid, raw.quadrature).map_err(|e| loc.at(None, format!("grid: {e}")))?;

    let function = match &raw.options.function {
        Some(s) => Some(parse_spanned_expr(&loc, s)?),
        None => components.last().cloned(),
    };
    let functions = if raw.options.functions.is_empty() {
        components
    } else {
        raw.options
            .functions
            .iter()
            .map(|s| parse_spanned_expr(&loc, s))
            .collect::<Result<_, _>>()?
    };
    if command == Command::Logdiff {
        if function.is_none() {
            return Err(loc.at(None, "`logdiff` needs `options.function` or a mapping"));
        }
        let (a, d) = (raw.options.alpha, raw.options.delta);
        if !(a > 1.0) || !(d > 0.0 && d < 1.0) {
            return Err(loc.at(
                None,
                format!("need alpha > 1 and 0 < delta < 1, got alpha = {a}, delta = {d}"),
            ));
        }
    }
    if command == Command::Partition && functions.len() < 2 {
        return Err(loc.at(None, "`partition` needs at least two functions"));
    }

    Ok(ExperimentConfig {
        seed: raw.seed,
        raw,
        map,
        system,
        c,
        grid,
        function,
        functions,
    })
}
