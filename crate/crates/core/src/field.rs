//! The physical field sensed by the network and the broadcast range geometry.
//!
//! A field is a total function from positions to fixed-arity measure vectors.
//! It never changes during a run.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::network::Sensor;
use crate::num::Num;
use crate::syntax::ast::Pos;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FieldError {
    #[error("malformed field spec: {0}")]
    Syntax(String),
    #[error("field arity must be positive")]
    EmptyArity,
    #[error("inconsistent field arity: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("grid must be a non-empty rectangle")]
    BadGrid,
    #[error("grid cell size must be positive and finite")]
    BadCell,
    #[error("cannot read grid file {path}: {message}")]
    Io { path: String, message: String },
    #[error("non-finite value in field definition")]
    NonFinite,
}

/// One additive term of an analytic field.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    /// `peak * exp(-d^2 / (2 sigma^2))` around the center.
    Gaussian { cx: f64, cy: f64, peak: f64, sigma: f64 },
    /// `a*x + b*y + c`.
    Linear { a: f64, b: f64, c: f64 },
    /// `peak / (1 + (d/scale)^2)` around the center.
    Radial { cx: f64, cy: f64, peak: f64, scale: f64 },
}

impl Source {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match *self {
            Source::Gaussian { cx, cy, peak, sigma } => {
                let d2 = (x - cx).powi(2) + (y - cy).powi(2);
                peak * (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Source::Linear { a, b, c } => a * x + b * y + c,
            Source::Radial { cx, cy, peak, scale } => {
                let d = (x - cx).hypot(y - cy);
                peak / (1.0 + (d / scale).powi(2))
            }
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Source::Gaussian { cx, cy, peak, sigma } => vec![cx, cy, peak, sigma],
            Source::Linear { a, b, c } => vec![a, b, c],
            Source::Radial { cx, cy, peak, scale } => vec![cx, cy, peak, scale],
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Source::Gaussian { .. } => "gaussian",
            Source::Linear { .. } => "linear",
            Source::Radial { .. } => "radial",
        }
    }
}

/// Nearest-neighbor lookup table. Cell `(i, j)` is centered at
/// `origin + (i * cell, j * cell)`; `rows[j][i]` holds its vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    origin: Pos,
    cell: f64,
    rows: Vec<Vec<Vec<f64>>>,
    file: Option<PathBuf>,
}

impl Grid {
    fn lookup(&self, pos: &Pos) -> &[f64] {
        let idx = |coord: f64, origin: f64, len: usize| -> usize {
            let raw = ((coord - origin) / self.cell).round();
            if raw.is_nan() || raw < 0.0 {
                0
            } else {
                (raw as usize).min(len - 1)
            }
        };
        let j = idx(pos.y.get(), self.origin.y.get(), self.rows.len());
        let row = &self.rows[j];
        let i = idx(pos.x.get(), self.origin.x.get(), row.len());
        &row[i]
    }

    pub fn origin(&self) -> Pos {
        self.origin
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn rows(&self) -> &[Vec<Vec<f64>>] {
        &self.rows
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldDef {
    Constant(Vec<f64>),
    Grid(Grid),
    Analytic(Vec<Source>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    arity: usize,
    def: FieldDef,
}

fn check_finite(values: &[f64]) -> Result<(), FieldError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(FieldError::NonFinite)
    }
}

impl FieldSpec {
    pub fn constant(values: Vec<f64>) -> Result<Self, FieldError> {
        if values.is_empty() {
            return Err(FieldError::EmptyArity);
        }
        check_finite(&values)?;
        Ok(FieldSpec {
            arity: values.len(),
            def: FieldDef::Constant(values),
        })
    }

    pub fn grid(origin: Pos, cell: f64, rows: Vec<Vec<Vec<f64>>>) -> Result<Self, FieldError> {
        Self::grid_inner(origin, cell, rows, None)
    }

    fn grid_inner(
        origin: Pos,
        cell: f64,
        rows: Vec<Vec<Vec<f64>>>,
        file: Option<PathBuf>,
    ) -> Result<Self, FieldError> {
        if !(cell.is_finite() && cell > 0.0) {
            return Err(FieldError::BadCell);
        }
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(FieldError::BadGrid);
        }
        let arity = rows[0][0].len();
        if arity == 0 {
            return Err(FieldError::EmptyArity);
        }
        for v in rows.iter().flatten() {
            if v.len() != arity {
                return Err(FieldError::Arity {
                    expected: arity,
                    found: v.len(),
                });
            }
            check_finite(v)?;
        }
        Ok(FieldSpec {
            arity,
            def: FieldDef::Grid(Grid {
                origin,
                cell,
                rows,
                file,
            }),
        })
    }

    pub fn analytic(sources: Vec<Source>) -> Result<Self, FieldError> {
        if sources.is_empty() {
            return Err(FieldError::Syntax("analytic field needs at least one term".into()));
        }
        for s in &sources {
            check_finite(&s.params())?;
            match *s {
                Source::Gaussian { sigma, .. } if sigma <= 0.0 => {
                    return Err(FieldError::Syntax("gaussian sigma must be positive".into()))
                }
                Source::Radial { scale, .. } if scale <= 0.0 => {
                    return Err(FieldError::Syntax("radial scale must be positive".into()))
                }
                _ => {}
            }
        }
        Ok(FieldSpec {
            arity: 1,
            def: FieldDef::Analytic(sources),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn definition(&self) -> &FieldDef {
        &self.def
    }

    /// Samples the field at `pos`.
    pub fn at(&self, pos: &Pos) -> Vec<Num> {
        match &self.def {
            FieldDef::Constant(v) => v.iter().copied().map(Num::new).collect(),
            FieldDef::Grid(g) => g.lookup(pos).iter().copied().map(Num::new).collect(),
            FieldDef::Analytic(sources) => {
                let (x, y) = (pos.x.get(), pos.y.get());
                vec![Num::new(sources.iter().map(|s| s.eval(x, y)).sum())]
            }
        }
    }

    /// Parses the text of an `@field` directive. Relative grid file paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, FieldError> {
        let text = text.trim();
        let (kind, rest) = text
            .split_once(char::is_whitespace)
            .unwrap_or((text, ""));
        let rest = rest.trim();
        match kind {
            "constant" => {
                let inner = rest
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| FieldError::Syntax("expected `constant [v, ...]`".into()))?;
                FieldSpec::constant(parse_numbers(inner, ',')?)
            }
            "grid" => parse_grid(rest, base),
            "analytic" => {
                let mut sources = Vec::new();
                for term in rest.split('+') {
                    sources.push(parse_source(term.trim())?);
                }
                FieldSpec::analytic(sources)
            }
            other => Err(FieldError::Syntax(format!("unknown field kind `{other}`"))),
        }
    }
}

fn parse_numbers(text: &str, sep: char) -> Result<Vec<f64>, FieldError> {
    text.split(sep)
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .map_err(|_| FieldError::Syntax(format!("bad number `{t}`")))
        })
        .collect()
}

fn parse_source(term: &str) -> Result<Source, FieldError> {
    let (name, args) = term
        .split_once('(')
        .and_then(|(n, a)| a.strip_suffix(')').map(|a| (n.trim(), a)))
        .ok_or_else(|| FieldError::Syntax(format!("bad analytic term `{term}`")))?;
    let v = parse_numbers(args, ',')?;
    let want = |n: usize| -> Result<(), FieldError> {
        if v.len() == n {
            Ok(())
        } else {
            Err(FieldError::Syntax(format!("`{name}` takes {n} arguments")))
        }
    };
    match name {
        "gaussian" => {
            want(4)?;
            Ok(Source::Gaussian { cx: v[0], cy: v[1], peak: v[2], sigma: v[3] })
        }
        "linear" => {
            want(3)?;
            Ok(Source::Linear { a: v[0], b: v[1], c: v[2] })
        }
        "radial" => {
            want(4)?;
            Ok(Source::Radial { cx: v[0], cy: v[1], peak: v[2], scale: v[3] })
        }
        other => Err(FieldError::Syntax(format!("unknown analytic term `{other}`"))),
    }
}

/// Parses grid cells: rows separated by newlines or `;`, cells by whitespace,
/// vector components by `,`.
pub fn parse_grid_rows(text: &str) -> Result<Vec<Vec<Vec<f64>>>, FieldError> {
    text.split(['\n', ';'])
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|cell| parse_numbers(cell, ','))
                .collect()
        })
        .collect()
}

fn parse_grid(rest: &str, base: Option<&Path>) -> Result<FieldSpec, FieldError> {
    let mut origin = None;
    let mut cell = None;
    let mut rows = None;
    let mut file = None;
    let mut s = rest;
    while !s.is_empty() {
        let (key, after) = s
            .split_once('=')
            .ok_or_else(|| FieldError::Syntax(format!("expected key=value in `{s}`")))?;
        let key = key.trim();
        let after = after.trim_start();
        let (val, tail) = if let Some(q) = after.strip_prefix('"') {
            let end = q
                .find('"')
                .ok_or_else(|| FieldError::Syntax("unterminated string".into()))?;
            (&q[..end], &q[end + 1..])
        } else if after.starts_with('(') {
            let end = after
                .find(')')
                .ok_or_else(|| FieldError::Syntax("unterminated position".into()))?;
            (&after[..=end], &after[end + 1..])
        } else {
            after.split_at(after.find(char::is_whitespace).unwrap_or(after.len()))
        };
        match key {
            "origin" => {
                let inner = val
                    .strip_prefix('(')
                    .and_then(|v| v.strip_suffix(')'))
                    .ok_or_else(|| FieldError::Syntax("origin must be (x, y)".into()))?;
                let xy = parse_numbers(inner, ',')?;
                if xy.len() != 2 {
                    return Err(FieldError::Syntax("origin must be (x, y)".into()));
                }
                origin = Some(Pos::new(xy[0], xy[1]));
            }
            "cell" => {
                cell = Some(
                    val.parse::<f64>()
                        .map_err(|_| FieldError::Syntax(format!("bad cell size `{val}`")))?,
                )
            }
            "file" => {
                let path = match base {
                    Some(b) if Path::new(val).is_relative() => b.join(val),
                    _ => PathBuf::from(val),
                };
                let content = std::fs::read_to_string(&path).map_err(|e| FieldError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                rows = Some(parse_grid_rows(&content)?);
                file = Some(PathBuf::from(val));
            }
            "data" => rows = Some(parse_grid_rows(val)?),
            other => return Err(FieldError::Syntax(format!("unknown grid key `{other}`"))),
        }
        s = tail.trim_start();
    }
    let origin = origin.unwrap_or(Pos::new(0.0, 0.0));
    let cell = cell.ok_or_else(|| FieldError::Syntax("grid needs cell=".into()))?;
    let rows = rows.ok_or_else(|| FieldError::Syntax("grid needs file= or data=".into()))?;
    FieldSpec::grid_inner(origin, cell, rows, file)
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nums = |v: &[f64]| {
            v.iter()
                .map(|x| Num::new(*x).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        match &self.def {
            FieldDef::Constant(v) => write!(f, "constant [{}]", nums(v)),
            FieldDef::Grid(g) => {
                write!(f, "grid origin=({}, {}) cell={} ", g.origin.x, g.origin.y, Num::new(g.cell))?;
                match &g.file {
                    Some(path) => write!(f, "file={}", path.display()),
                    None => {
                        let rows: Vec<String> = g
                            .rows
                            .iter()
                            .map(|row| {
                                row.iter()
                                    .map(|c| {
                                        c.iter()
                                            .map(|x| Num::new(*x).to_string())
                                            .collect::<Vec<_>>()
                                            .join(",")
                                    })
                                    .collect::<Vec<_>>()
                                    .join(" ")
                            })
                            .collect();
                        write!(f, "data=\"{}\"", rows.join("; "))
                    }
                }
            }
            FieldDef::Analytic(sources) => {
                let terms: Vec<String> = sources
                    .iter()
                    .map(|s| format!("{}({})", s.name(), nums(&s.params())))
                    .collect();
                write!(f, "analytic {}", terms.join(" + "))
            }
        }
    }
}

/// Whether `receiver` hears a broadcast from `sender`: the distance between
/// them is strictly less than the sender's radius.
pub fn in_range(sender: &Sensor, receiver: &Sensor) -> bool {
    position_in_range(&sender.position, sender.radius.get(), &receiver.position)
}

pub fn position_in_range(from: &Pos, radius: f64, to: &Pos) -> bool {
    from.distance(to) < radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_uniform() {
        let f = FieldSpec::constant(vec![21.5]).unwrap();
        assert_eq!(f.at(&Pos::new(-100.0, 3.0)), vec![Num::new(21.5)]);
        assert_eq!(f.arity(), 1);
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let f = FieldSpec::parse("analytic gaussian(0, 0, 10, 1)", None).unwrap();
        assert_eq!(f.at(&Pos::new(0.0, 0.0)), vec![Num::new(10.0)]);
        assert!(f.at(&Pos::new(1.0, 0.0))[0] < Num::new(10.0));
    }

    #[test]
    fn grid_example_cell() {
        let f = FieldSpec::grid(Pos::new(0.0, 0.0), 1.0, vec![vec![vec![1.0], vec![2.0]]]).unwrap();
        assert_eq!(f.at(&Pos::new(0.2, 0.0)), vec![Num::new(1.0)]);
        assert_eq!(f.at(&Pos::new(0.8, 0.0)), vec![Num::new(2.0)]);
        // clamped outside the table
        assert_eq!(f.at(&Pos::new(50.0, -9.0)), vec![Num::new(2.0)]);
    }

    #[test]
    fn spec_text_round_trips() {
        for text in [
            "constant [1, 2.5]",
            "analytic gaussian(0, 0, 10, 1) + linear(1, 0, 3) + radial(2, 2, 4, 1.5)",
            "grid origin=(0, 0) cell=0.5 data=\"1,2 3,4; 5,6 7,8\"",
        ] {
            let f = FieldSpec::parse(text, None).unwrap();
            assert_eq!(f.to_string(), text);
            assert_eq!(FieldSpec::parse(&f.to_string(), None).unwrap(), f);
        }
    }

    #[test]
    fn grid_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("g.txt"), "1 2\n3 4\n").unwrap();
        let f = FieldSpec::parse("grid origin=(10, 10) cell=2 file=g.txt", Some(dir.path())).unwrap();
        assert_eq!(f.at(&Pos::new(12.1, 12.4)), vec![Num::new(4.0)]);
        assert_eq!(f.to_string(), "grid origin=(10, 10) cell=2 file=g.txt");
        assert!(matches!(
            FieldSpec::parse("grid cell=2 file=missing.txt", Some(dir.path())),
            Err(FieldError::Io { .. })
        ));
    }

    #[test]
    fn malformed_specs_are_rejected() {
        assert!(FieldSpec::parse("constant []", None).is_err());
        assert!(FieldSpec::parse("wavy 1", None).is_err());
        assert!(FieldSpec::parse("analytic gaussian(0,0,1)", None).is_err());
        assert!(FieldSpec::parse("grid cell=0 data=\"1\"", None).is_err());
        assert!(matches!(
            FieldSpec::parse("grid cell=1 data=\"1 2,3\"", None),
            Err(FieldError::Arity { .. })
        ));
        assert_eq!(
            FieldSpec::parse("grid cell=1 data=\"1 2; 3\"", None),
            Err(FieldError::BadGrid)
        );
    }

    #[test]
    fn range_is_strict_and_uses_sender_radius() {
        let o = Pos::new(0.0, 0.0);
        let p = Pos::new(3.0, 4.0);
        assert!(position_in_range(&o, 6.0, &p));
        assert!(!position_in_range(&o, 5.0, &p));
        // the receiver's radius plays no role
        assert!(!position_in_range(&o, 1.0, &Pos::new(2.0, 0.0)));
        assert!(position_in_range(&Pos::new(2.0, 0.0), 100.0, &o));
    }
}
