use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MatrixError, Provenance, SeedSet, SimilarityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    /// Boost applied at a seed's own cell (`1 + alpha`).
    pub alpha: f64,
    /// Gaussian width of the boost, in matrix index units.
    pub sigma_p: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            sigma_p: 5.0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), MatrixError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(MatrixError::Config(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.sigma_p > 0.0 && self.sigma_p.is_finite()) {
            return Err(MatrixError::Config(format!(
                "sigma_p must be > 0, got {}",
                self.sigma_p
            )));
        }
        Ok(())
    }
}

/// Boosts entries near seed correspondences:
/// `P(i,j) = N(i,j) · Π_{(k,l) ∈ seeds} (1 + α·exp(−‖(i,j)−(k,l)‖² / 2σ_p²))`.
pub fn propagate(
    n: &SimilarityMatrix,
    seeds: &SeedSet,
    cfg: &PropagationConfig,
) -> Result<SimilarityMatrix, MatrixError> {
    if n.provenance() != Provenance::Normalized {
        return Err(MatrixError::Provenance {
            expected: Provenance::Normalized,
            found: n.provenance(),
        });
    }
    cfg.validate()?;
    seeds.check_bounds(n.rows(), n.cols())?;
    let origin = seeds.origin;
    let seeds: Vec<(f64, f64)> = seeds.iter().map(|(k, l)| (k as f64, l as f64)).collect();
    let two_var = 2.0 * cfg.sigma_p * cfg.sigma_p;
    let cols = n.cols();
    let mut values = vec![0.0; n.rows() * cols];
    values
        .par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(i, out)| {
            let row = n.row(i);
            for (j, slot) in out.iter_mut().enumerate() {
                let mut factor = 1.0;
                for &(k, l) in &seeds {
                    let d2 = (i as f64 - k).powi(2) + (j as f64 - l).powi(2);
                    factor *= 1.0 + cfg.alpha * (-d2 / two_var).exp();
                }
                *slot = row[j] * factor;
            }
        });
    Ok(n.derive(values, Provenance::Propagated)?.with_echo(
        "propagation",
        serde_json::json!({
            "alpha": cfg.alpha,
            "sigma_p": cfg.sigma_p,
            "seeds": seeds.len(),
            "origin": origin,
        }),
    ))
}
