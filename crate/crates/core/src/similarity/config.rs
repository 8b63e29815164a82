use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SimilarityError;
use crate::feature_store::DEFAULT_SCALE_TAGS;

/// Which image similarity fills a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Average position-wise cosine of the fixed-size maps.
    Features,
    /// Symmetric multi-scale reciprocal matching with a displacement penalty.
    Matching,
    /// Like `Matching`, penalizing residuals to a per-direction affine fit.
    Trans,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Features, Method::Matching, Method::Trans];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Features => "features",
            Method::Matching => "matching",
            Method::Trans => "trans",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "features" => Ok(Method::Features),
            "matching" => Ok(Method::Matching),
            "trans" => Ok(Method::Trans),
            other => Err(SimilarityError::Config(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    /// Gaussian width for displacement and residual penalties, in normalized
    /// coordinates (largest image side = 1).
    pub sigma: f64,
    pub ransac_iterations: usize,
    /// Target scales searched for each source feature.
    pub scale_tags: Vec<u32>,
    /// Scale of the source map in each direction.
    pub base_scale: u32,
    pub rng_seed: u64,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            sigma: 1.0 / 50f64.sqrt(),
            ransac_iterations: 100,
            scale_tags: DEFAULT_SCALE_TAGS.to_vec(),
            base_scale: 20,
            rng_seed: 0,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), SimilarityError> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(SimilarityError::Config(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if self.ransac_iterations == 0 {
            return Err(SimilarityError::Config(
                "ransac_iterations must be >= 1".into(),
            ));
        }
        if self.scale_tags.is_empty() {
            return Err(SimilarityError::Config("scale_tags is empty".into()));
        }
        Ok(())
    }

    /// `1 / (2σ²)`.
    pub(crate) fn inv_two_var(&self) -> f64 {
        1.0 / (2.0 * self.sigma * self.sigma)
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = SimilarityConfig::default();
        assert!((cfg.sigma - 0.141_421).abs() < 1e-6);
        assert_eq!(cfg.ransac_iterations, 100);
        assert_eq!(cfg.scale_tags, vec![18, 19, 20, 21, 22]);
        assert_eq!(cfg.base_scale, 20);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let cfg = SimilarityConfig {
            sigma: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SimilarityConfig {
            ransac_iterations: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert!("sift".parse::<Method>().is_err());
    }
}
