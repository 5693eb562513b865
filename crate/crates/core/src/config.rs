//! TOML experiment configuration.
//!
//! Every section and key is optional; unknown keys are rejected.
//!
//! ```toml
//! [spacetime]
//! t_min = -1.0
//! t_max = 1.0
//! spatial = "circle"   # or "torus"
//! lengths = [4.0]      # circumference(s)
//! warp = [1.0]         # polynomial coefficients of f(t), lowest first
//!
//! [grid]
//! nt = 64
//! ns = [64]
//! radius = 5           # stencil radius of the causal DAG
//! quad_factor = 3      # reconstruction quadrature refinement
//!
//! [embedding]
//! fspec = "h"          # h | fr:<r> | abs | id | chi+ | chi-
//! norm = "2"           # 1 | 2 | inf
//!
//! [experiment]
//! seed = 1
//! trials = 500
//! points = [[0.0, 0.0]]
//!
//! [tolerances]
//! boundary = 1e-9      # reconstruction overrides (default: automatic)
//! relation = 1e-6
//! ```

use crate::embedding::{FSpec, Norm};
use crate::error::{Error, Result};
use crate::spacetime::{Grid, Point, SpacetimeSpec, SpatialFactor, Warp};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spatial {
    Circle,
    Torus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpacetimeConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub spatial: Spatial,
    pub lengths: Vec<f64>,
    pub warp: Vec<f64>,
}

impl Default for SpacetimeConfig {
    fn default() -> Self {
        Self { t_min: -1.0, t_max: 1.0, spatial: Spatial::Circle, lengths: vec![4.0], warp: vec![1.0] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nt: usize,
    pub ns: Vec<usize>,
    pub radius: usize,
    pub quad_factor: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nt: 64, ns: vec![64], radius: crate::lorentz::DEFAULT_RADIUS, quad_factor: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmbeddingConfig {
    pub fspec: String,
    pub norm: String,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self { fspec: "h".into(), norm: "2".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub seed: u64,
    pub trials: usize,
    /// Points as `[t, s]` or `[t, s1, s2]`.
    pub points: Vec<Vec<f64>>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self { seed: 1, trials: 500, points: Vec::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub boundary: Option<f64>,
    pub relation: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub spacetime: SpacetimeConfig,
    pub grid: GridConfig,
    pub embedding: EmbeddingConfig,
    pub experiment: ExperimentSection,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Parses and validates.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let spec = self.spec()?;
        if self.grid.ns.len() != spec.spatial_dims() {
            return Err(Error::Config(format!(
                "grid.ns has {} entries, the spatial factor needs {}",
                self.grid.ns.len(),
                spec.spatial_dims()
            )));
        }
        let min = Grid::<f64>::MIN_RESOLUTION;
        if self.grid.nt < min || self.grid.ns.iter().any(|&n| n < min) {
            return Err(Error::Config(format!("grid resolutions must be at least {min}")));
        }
        if self.grid.radius == 0 || self.grid.quad_factor == 0 {
            return Err(Error::Config("grid.radius and grid.quad_factor must be positive".into()));
        }
        self.fspec()?;
        self.norm()?;
        for p in &self.experiment.points {
            self.point(p)?;
        }
        for (name, t) in [("boundary", self.tolerances.boundary), ("relation", self.tolerances.relation)] {
            if let Some(t) = t {
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::Config(format!("tolerances.{name} must be positive")));
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<SpacetimeSpec<f64>> {
        let s = &self.spacetime;
        let spatial = match (s.spatial, s.lengths.as_slice()) {
            (Spatial::Circle, [l]) => SpatialFactor::Circle { circumference: *l },
            (Spatial::Torus, [l1, l2]) => SpatialFactor::Torus { l1: *l1, l2: *l2 },
            (kind, ls) => {
                return Err(Error::Config(format!("spacetime.lengths has {} entries, {kind:?} needs {}", ls.len(), match kind {
                    Spatial::Circle => 1,
                    Spatial::Torus => 2,
                })))
            }
        };
        if s.warp.is_empty() {
            return Err(Error::Config("spacetime.warp needs at least one coefficient".into()));
        }
        SpacetimeSpec::new(s.t_min, s.t_max, spatial, Warp::polynomial(s.warp.clone()))
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid<f64>> {
        Grid::build(&self.spec()?, self.grid.nt, &self.grid.ns)
    }

    pub fn fspec(&self) -> Result<FSpec> {
        self.embedding.fspec.parse().map_err(|e: Error| Error::Config(e.to_string()))
    }

    pub fn norm(&self) -> Result<Norm> {
        self.embedding.norm.parse().map_err(|e: Error| Error::Config(e.to_string()))
    }

    /// A point `[t, s…]` of the configured slab.
    pub fn point(&self, coords: &[f64]) -> Result<Point<f64>> {
        let spec = self.spec()?;
        match coords.split_first() {
            Some((t, s)) => spec.point(*t, s).map_err(|e| Error::Config(e.to_string())),
            None => Err(Error::Config("empty point".into())),
        }
    }

    pub fn points(&self) -> Result<Vec<Point<f64>>> {
        self.experiment.points.iter().map(|p| self.point(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.spec().unwrap().analytic_volume(), 8.0);
    }

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_toml_str(
            "[spacetime]\nt_min = 0.0\nt_max = 1.0\nlengths = [2.0]\nwarp = [0.5]\n[grid]\nnt = 8\nns = [8]\n[experiment]\npoints = [[0.5, 0.1]]\n",
        )
        .unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.points().unwrap()[0].t, 0.5);
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        std::fs::write(&p, "[spacetime]\nspatial = \"torus\"\nlengths = [2.0, 3.0]\n[grid]\nns = [8, 8]\nnt = 8\n").unwrap();
        let c = ExperimentConfig::load(&p).unwrap();
        assert_eq!(c.grid().unwrap().len(), 512);
        assert!(matches!(ExperimentConfig::load(&dir.path().join("missing.toml")), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "[grid]\nnt = 8\nbogus = 1\n",
            "[spacetime]\nt_min = 1.0\nt_max = 0.0\n",
            "[spacetime]\nspatial = \"torus\"\n",
            "[grid]\nnt = 2\n",
            "[embedding]\nfspec = \"cubic\"\n",
            "[experiment]\npoints = [[5.0, 0.0]]\n",
            "[tolerances]\nrelation = -1.0\n",
            "unknown = 3\n",
            "[spacetime\n",
        ] {
            assert!(matches!(ExperimentConfig::from_toml_str(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
