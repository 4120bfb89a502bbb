use serde::{Deserialize, Serialize};

/// Numerical tolerances shared across the pipeline.
///
/// `geom` is absolute on unit-scale data (unit vectors, angles). `alg` is the
/// scale-free closure residual threshold. `rigid` is relative to the diameter of
/// the structure being checked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub geom: f64,
    pub alg: f64,
    pub rigid: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            geom: 1e-10,
            alg: 1e-9,
            rigid: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn with_alg(mut self, alg: f64) -> Self {
        self.alg = alg;
        self
    }
}
