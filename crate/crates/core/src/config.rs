//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, list-valued keys are
//! repeated. Tuples are comma separated:
//!
//! ```text
//! vertex = 0, 0
//! vertex = 3, 0
//! vertex = 1, 2
//! side = 0
//! initial = random
//! seed = 7
//! level = 4
//! level = 5
//! T = 15
//! T = 30
//! ```

use std::collections::HashMap;
use std::path::PathBuf;

use crate::analytic::{reference_triangle, SineMode};
use crate::error::{Error, Result};
use crate::geometry::{SideLabel, Triangle, Vec2};
use crate::initial::InitialData;
use crate::mesh::MAX_LEVEL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Scalar,
    List,
}

const KEYS: &[(&str, Kind)] = &[
    ("vertex", Kind::List),
    ("side", Kind::Scalar),
    ("initial", Kind::Scalar),
    ("mode", Kind::List),
    ("seed", Kind::Scalar),
    ("bump_center", Kind::Scalar),
    ("bump_radius", Kind::Scalar),
    ("bump_amplitude", Kind::Scalar),
    ("level", Kind::List),
    ("T", Kind::List),
    ("cfl_safety", Kind::Scalar),
    ("sample_stride", Kind::Scalar),
    ("output", Kind::Scalar),
    ("timeseries", Kind::Scalar),
    ("mesh_dump", Kind::Scalar),
    ("n", Kind::List),
    ("length", Kind::Scalar),
    ("sine", Kind::List),
    ("random_modes", Kind::Scalar),
    ("trials", Kind::Scalar),
];

/// A parsed value with its source position (1-based).
#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

impl Entry {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::ConfigParse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, what: &str) -> Result<T> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("expected {what}, found '{}'", self.value)))
    }

    fn tuple(&self, arity: usize) -> Result<Vec<&str>> {
        let parts: Vec<&str> = self.value.split(',').map(str::trim).collect();
        if parts.len() != arity || parts.iter().any(|p| p.is_empty()) {
            return Err(self.error(format!(
                "expected {arity} comma-separated values, found '{}'",
                self.value
            )));
        }
        Ok(parts)
    }

    fn floats(&self, arity: usize) -> Result<Vec<f64>> {
        self.tuple(arity)?
            .into_iter()
            .map(|p| {
                p.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.error(format!("expected a finite number, found '{p}'")))
            })
            .collect()
    }

    fn float(&self) -> Result<f64> {
        Ok(self.floats(1)?[0])
    }

    fn positive(&self) -> Result<f64> {
        let v = self.float()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(format!("expected a positive number, found {v}")))
        }
    }

    fn flag(&self) -> Result<bool> {
        match self.value.as_str() {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            other => Err(self.error(format!("expected true or false, found '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub triangle: Triangle,
    pub side: SideLabel,
    pub initial: InitialData,
    /// Isosceles modes for the eigenmode demo.
    pub modes: Vec<(u32, u32)>,
    pub seed: u64,
    pub levels: Vec<u32>,
    pub final_times: Vec<f64>,
    pub cfl_safety: f64,
    pub sample_stride: usize,
    pub output: PathBuf,
    /// Write per-sample boundary functionals next to the report.
    pub timeseries: bool,
    pub mesh_dump: bool,
    /// Square-demo mode numbers.
    pub square_n: Vec<u32>,
    /// 1D demo interval and series. Empty `sine` means a seeded random
    /// series with `random_modes` terms.
    pub length: f64,
    pub sine: Vec<SineMode>,
    pub random_modes: u32,
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            triangle: reference_triangle(),
            side: SideLabel::ALL[1],
            initial: InitialData::RandomSmooth { seed: 1 },
            modes: vec![(1, 2), (1, 3), (2, 3)],
            seed: 1,
            levels: vec![5],
            final_times: vec![10.0],
            cfl_safety: 0.5,
            sample_stride: 1,
            output: PathBuf::from("out"),
            timeseries: false,
            mesh_dump: false,
            square_n: (1..=16).collect(),
            length: 1.0,
            sine: Vec::new(),
            random_modes: 5,
            trials: 1000,
        }
    }
}

fn tokenize(text: &str) -> Result<HashMap<&'static str, Vec<Entry>>> {
    let mut entries: HashMap<&'static str, Vec<Entry>> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indent = content.len() - content.trim_start().len();
        let Some(eq) = content.find('=') else {
            return Err(Error::ConfigParse {
                line,
                column: indent + 1,
                message: "expected 'key = value'".into(),
            });
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value_col = eq + 2 + (after.len() - after.trim_start().len());
        let Some(&(name, kind)) = KEYS.iter().find(|(k, _)| *k == key) else {
            return Err(Error::ConfigParse {
                line,
                column: indent + 1,
                message: format!("unknown key '{key}'"),
            });
        };
        let value = after.trim();
        if value.is_empty() {
            return Err(Error::ConfigParse {
                line,
                column: value_col,
                message: format!("missing value for '{key}'"),
            });
        }
        let slot = entries.entry(name).or_default();
        if kind == Kind::Scalar && !slot.is_empty() {
            return Err(Error::ConfigParse {
                line,
                column: indent + 1,
                message: format!("'{key}' given more than once"),
            });
        }
        slot.push(Entry {
            value: value.to_string(),
            line,
            column: value_col,
        });
    }
    Ok(entries)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let entries = tokenize(text)?;
        let get = |k: &str| entries.get(k).map(Vec::as_slice).unwrap_or(&[]);
        let one = |k: &str| get(k).first();
        let mut cfg = Self::default();

        let vertices = get("vertex");
        if !vertices.is_empty() {
            if vertices.len() != 3 {
                return Err(vertices[vertices.len() - 1].error(format!(
                    "expected exactly 3 vertices, found {}",
                    vertices.len()
                )));
            }
            let mut p = [Vec2::ZERO; 3];
            for (slot, e) in p.iter_mut().zip(vertices) {
                let xy = e.floats(2)?;
                *slot = Vec2::new(xy[0], xy[1]);
            }
            cfg.triangle = Triangle::from_vertices(p[0], p[1], p[2])
                .map_err(|err| vertices[0].error(err.to_string()))?;
        }
        if let Some(e) = one("side") {
            let i: usize = e.parse("a side label 0, 1 or 2")?;
            cfg.side =
                SideLabel::opposite(i).ok_or_else(|| e.error("side label must be 0, 1 or 2"))?;
        }
        if let Some(e) = one("seed") {
            cfg.seed = e.parse("an unsigned integer seed")?;
        }
        let modes = get("mode");
        if !modes.is_empty() {
            cfg.modes = modes
                .iter()
                .map(|e| {
                    let mn = e.tuple(2)?;
                    let m: u32 = mn[0]
                        .parse()
                        .map_err(|_| e.error("mode indices must be positive integers"))?;
                    let n: u32 = mn[1]
                        .parse()
                        .map_err(|_| e.error("mode indices must be positive integers"))?;
                    crate::analytic::IsoscelesMode::new(m, n)
                        .map_err(|err| e.error(err.to_string()))?;
                    Ok((m, n))
                })
                .collect::<Result<_>>()?;
        }
        cfg.initial = match one("initial") {
            None => InitialData::RandomSmooth { seed: cfg.seed },
            Some(e) => match e.value.as_str() {
                "random" => InitialData::RandomSmooth { seed: cfg.seed },
                "eigenmode" => {
                    if modes.len() != 1 {
                        return Err(e.error("initial = eigenmode needs exactly one 'mode = m, n'"));
                    }
                    let (m, n) = cfg.modes[0];
                    InitialData::Eigenmode { m, n }
                }
                "bump" => {
                    let center = one("bump_center")
                        .ok_or_else(|| e.error("initial = bump needs 'bump_center'"))?
                        .floats(2)?;
                    let radius = match one("bump_radius") {
                        Some(r) => r.positive()?,
                        None => 0.25 * cfg.triangle.longest_side(),
                    };
                    let amplitude = match one("bump_amplitude") {
                        Some(a) => a.float()?,
                        None => 1.0,
                    };
                    InitialData::Bump {
                        center: Vec2::new(center[0], center[1]),
                        radius,
                        amplitude,
                    }
                }
                other => {
                    return Err(e.error(format!(
                        "unknown initial data '{other}' (expected eigenmode, random or bump)"
                    )))
                }
            },
        };
        let levels = get("level");
        if !levels.is_empty() {
            cfg.levels = levels
                .iter()
                .map(|e| {
                    let l: u32 = e.parse("a refinement level")?;
                    if l > MAX_LEVEL {
                        return Err(
                            e.error(format!("level {l} exceeds the maximum of {MAX_LEVEL}"))
                        );
                    }
                    Ok(l)
                })
                .collect::<Result<_>>()?;
        }
        let times = get("T");
        if !times.is_empty() {
            cfg.final_times = times.iter().map(Entry::positive).collect::<Result<_>>()?;
        }
        if let Some(e) = one("cfl_safety") {
            let s = e.float()?;
            if !(s > 0.0 && s <= 1.0) {
                return Err(e.error(format!("cfl_safety must lie in (0, 1], found {s}")));
            }
            cfg.cfl_safety = s;
        }
        if let Some(e) = one("sample_stride") {
            cfg.sample_stride = e.parse("a positive integer")?;
            if cfg.sample_stride == 0 {
                return Err(e.error("sample_stride must be at least 1"));
            }
        }
        if let Some(e) = one("output") {
            cfg.output = PathBuf::from(&e.value);
        }
        if let Some(e) = one("timeseries") {
            cfg.timeseries = e.flag()?;
        }
        if let Some(e) = one("mesh_dump") {
            cfg.mesh_dump = e.flag()?;
        }
        let ns = get("n");
        if !ns.is_empty() {
            cfg.square_n = ns
                .iter()
                .map(|e| {
                    let n: u32 = e.parse("a positive integer")?;
                    if n == 0 {
                        return Err(e.error("n must be at least 1"));
                    }
                    Ok(n)
                })
                .collect::<Result<_>>()?;
        }
        if let Some(e) = one("length") {
            cfg.length = e.positive()?;
        }
        cfg.sine = get("sine")
            .iter()
            .map(|e| {
                let parts = e.tuple(3)?;
                let k: u32 = parts[0]
                    .parse()
                    .ok()
                    .filter(|k| *k > 0)
                    .ok_or_else(|| e.error("wavenumber must be a positive integer"))?;
                let coef = |s: &str| {
                    s.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| e.error(format!("expected a finite number, found '{s}'")))
                };
                Ok(SineMode {
                    k,
                    a: coef(parts[1])?,
                    b: coef(parts[2])?,
                })
            })
            .collect::<Result<_>>()?;
        if let Some(e) = one("random_modes") {
            cfg.random_modes = e.parse("a mode count")?;
        }
        if let Some(e) = one("trials") {
            cfg.trials = e.parse("a trial count")?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Replaces the seed everywhere it feeds random data.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let InitialData::RandomSmooth { seed: s } = &mut self.initial {
            *s = seed;
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn position(err: Error) -> (usize, usize) {
        match err {
            Error::ConfigParse { line, column, .. } => (line, column),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_config() {
        let cfg = ExperimentConfig::parse(
            "# acute\nvertex = 0, 0\nvertex = 3, 0\nvertex = 1, 2\nside = 0\n\
             initial = random\nseed = 9\nlevel = 4\nlevel = 5\nT = 15\nT = 30  # two windows\n\
             cfl_safety = 0.4\noutput = runs/a\ntimeseries = true\n",
        )
        .unwrap();
        assert_eq!(cfg.levels, vec![4, 5]);
        assert_eq!(cfg.final_times, vec![15.0, 30.0]);
        assert_eq!(cfg.initial, InitialData::RandomSmooth { seed: 9 });
        assert_eq!(cfg.side, SideLabel::ALL[0]);
        assert_eq!(cfg.triangle.vertex(2), Vec2::new(1.0, 2.0));
        assert_eq!(cfg.cfl_safety, 0.4);
        assert!(cfg.timeseries && !cfg.mesh_dump);
        assert_eq!(cfg.output, PathBuf::from("runs/a"));
    }

    #[test]
    fn eigenmode_and_bump() {
        let cfg = ExperimentConfig::parse("initial = eigenmode\nmode = 1, 2\n").unwrap();
        assert_eq!(cfg.initial, InitialData::Eigenmode { m: 1, n: 2 });
        let cfg =
            ExperimentConfig::parse("initial = bump\nbump_center = 2, 1\nbump_radius = 0.5\n")
                .unwrap();
        assert!(matches!(cfg.initial, InitialData::Bump { radius, .. } if radius == 0.5));
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(
            position(ExperimentConfig::parse("level = 4\nbogus = 1\n").unwrap_err()),
            (2, 1)
        );
        assert_eq!(
            position(ExperimentConfig::parse("T = -1\n").unwrap_err()),
            (1, 5)
        );
        assert_eq!(
            position(ExperimentConfig::parse("  level =  x\n").unwrap_err()),
            (1, 12)
        );
        assert_eq!(
            position(ExperimentConfig::parse("level = 13\n").unwrap_err()),
            (1, 9)
        );
        assert_eq!(
            position(ExperimentConfig::parse("side = 0\nside = 1\n").unwrap_err()),
            (2, 1)
        );
        assert_eq!(
            position(ExperimentConfig::parse("just text\n").unwrap_err()),
            (1, 1)
        );
        assert_eq!(
            position(
                ExperimentConfig::parse("vertex = 0, 0\nvertex = 1, 1\nvertex = 2, 2\n")
                    .unwrap_err()
            )
            .0,
            1
        );
        assert_eq!(
            position(ExperimentConfig::parse("initial = eigenmode\n").unwrap_err()),
            (1, 11)
        );
        assert_eq!(
            position(ExperimentConfig::parse("mode = 2, 2\n").unwrap_err()),
            (1, 8)
        );
    }

    #[test]
    fn seed_override() {
        let cfg = ExperimentConfig::parse("seed = 3\n").unwrap().with_seed(11);
        assert_eq!(cfg.initial, InitialData::RandomSmooth { seed: 11 });
        assert_eq!(cfg.seed, 11);
    }
}
