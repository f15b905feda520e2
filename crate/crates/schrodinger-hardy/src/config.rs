//! Experiment configuration: a flat key=value file with command-line
//! overrides, a fixed seed, and resolvable grid/potential specs.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::potential::Potential;

/// Potential selector with parameters, parsed from `name:params`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Constant(f64),
    Power(f64),
    BumpPlusConst { floor: f64, amplitude: f64, radius: f64 },
    TwoLevelSplit { left: f64, right: f64 },
}

impl PotentialSpec {
    pub fn parse(s: &str) -> Result<PotentialSpec> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if rest.is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number '{t}' in potential spec")))
                })
                .collect::<Result<_>>()?
        };
        match (name, nums.as_slice()) {
            ("const", [c]) => Ok(PotentialSpec::Constant(*c)),
            ("const", []) => Ok(PotentialSpec::Constant(1.0)),
            ("power", [a]) => Ok(PotentialSpec::Power(*a)),
            ("bump", [floor, amplitude, radius]) => Ok(PotentialSpec::BumpPlusConst {
                floor: *floor,
                amplitude: *amplitude,
                radius: *radius,
            }),
            ("twolevel", [left, right]) => Ok(PotentialSpec::TwoLevelSplit {
                left: *left,
                right: *right,
            }),
            _ => Err(Error::Config(format!("unknown potential spec '{s}'"))),
        }
    }

    pub fn build(&self, grid: Grid) -> Result<Potential> {
        match *self {
            PotentialSpec::Constant(c) => Potential::constant(grid, c),
            PotentialSpec::Power(a) => Potential::power_law(grid, a),
            PotentialSpec::BumpPlusConst {
                floor,
                amplitude,
                radius,
            } => Potential::bump_plus_constant(grid, floor, amplitude, radius),
            PotentialSpec::TwoLevelSplit { left, right } => {
                Potential::two_level_split(grid, left, right)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PotentialSpec::Constant(c) => format!("const:{c}"),
            PotentialSpec::Power(a) => format!("power:{a}"),
            PotentialSpec::BumpPlusConst {
                floor,
                amplitude,
                radius,
            } => format!("bump:{floor},{amplitude},{radius}"),
            PotentialSpec::TwoLevelSplit { left, right } => format!("twolevel:{left},{right}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub half_width: f64,
    pub points: usize,
    pub potential: PotentialSpec,
    pub q: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// family size for sweep commands
    pub cases: usize,
    /// sampled point pairs for the growth-constant fit
    pub shen_pairs: usize,
    /// center stride of the oscillation ball sampling
    pub ball_stride: usize,
    /// gauge-solver overrides
    pub lambda_cap: f64,
    pub gauge_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let out_dir = std::env::var("SH_OUTPUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|_| PathBuf::from("out"));
        ExperimentConfig {
            dim: 2,
            half_width: 2.0,
            points: 33,
            potential: PotentialSpec::Constant(1.0),
            q: 2.0,
            seed: 1,
            out_dir,
            cases: 50,
            shen_pairs: 200,
            ball_stride: 4,
            lambda_cap: 1e12,
            gauge_tol: 1e-8,
        }
    }
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |k: &str, v: &str| Error::Config(format!("bad value '{v}' for key '{k}'"));
        match key {
            "d" | "dim" => self.dim = value.parse().map_err(|_| bad(key, value))?,
            "R" | "half_width" => {
                self.half_width = value.parse().map_err(|_| bad(key, value))?
            }
            "m" | "points" => self.points = value.parse().map_err(|_| bad(key, value))?,
            "potential" => self.potential = PotentialSpec::parse(value)?,
            "q" => self.q = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "cases" => self.cases = value.parse().map_err(|_| bad(key, value))?,
            "shen_pairs" => self.shen_pairs = value.parse().map_err(|_| bad(key, value))?,
            "ball_stride" => self.ball_stride = value.parse().map_err(|_| bad(key, value))?,
            "lambda_cap" => self.lambda_cap = value.parse().map_err(|_| bad(key, value))?,
            "gauge_tol" => self.gauge_tol = value.parse().map_err(|_| bad(key, value))?,
            _ => return Err(Error::Config(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Parse a flat key=value file; blank lines and '#' comments allowed.
    pub fn from_file(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.dim, self.half_width, self.points)
    }

    pub fn build_potential(&self) -> Result<Potential> {
        self.potential.build(self.grid()?)
    }

    /// The refined grid used by stability comparisons (3m/2 points).
    pub fn refined(&self) -> ExperimentConfig {
        let mut fine = self.clone();
        fine.points = 3 * self.points / 2;
        fine
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_potential_specs() {
        assert_eq!(
            PotentialSpec::parse("const:2.5").unwrap(),
            PotentialSpec::Constant(2.5)
        );
        assert_eq!(
            PotentialSpec::parse("power:2").unwrap(),
            PotentialSpec::Power(2.0)
        );
        assert!(matches!(
            PotentialSpec::parse("bump:1,3,0.8").unwrap(),
            PotentialSpec::BumpPlusConst { .. }
        ));
        assert!(PotentialSpec::parse("nonsense:1").is_err());
        assert!(PotentialSpec::parse("power:x").is_err());
    }

    #[test]
    fn config_file_roundtrip() {
        let dir = std::env::temp_dir().join("sh_cfg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("exp.cfg");
        std::fs::write(
            &path,
            "# comment\nd=1\nR=3.0\nm=65\npotential=power:2\nseed=77\ncases=10\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        assert_eq!(cfg.dim, 1);
        assert_eq!(cfg.half_width, 3.0);
        assert_eq!(cfg.points, 65);
        assert_eq!(cfg.seed, 77);
        assert_eq!(cfg.cases, 10);
        assert_eq!(cfg.refined().points, 97);

        let mut cfg = cfg;
        cfg.set("m", "49").unwrap();
        assert_eq!(cfg.points, 49);
        assert!(cfg.set("bogus", "1").is_err());
        assert!(cfg.set("m", "notanumber").is_err());
    }
}
