use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::rng::seeded;
use super::TheoryError;

/// Per-example gradients for one DP-SGD aggregation step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBatch {
    pub gradients: Vec<Vec<f64>>,
    pub clip_norm: f64,
    pub noise_multiplier: f64,
    pub seed: u64,
}

impl GradientBatch {
    pub fn batch_size(&self) -> usize {
        self.gradients.len()
    }

    fn dimension(&self) -> Result<usize, TheoryError> {
        let first = self.gradients.first().ok_or(TheoryError::EmptyBatch)?;
        let expected = first.len();
        if expected == 0 {
            return Err(TheoryError::ZeroDimension);
        }
        for (index, g) in self.gradients.iter().enumerate() {
            if g.len() != expected {
                return Err(TheoryError::RaggedBatch {
                    index,
                    expected,
                    found: g.len(),
                });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(TheoryError::InvalidParameter(format!(
                    "gradient {index} has a non-finite coordinate"
                )));
            }
        }
        Ok(expected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpSgdOutput {
    pub noisy_mean: Vec<f64>,
    /// L2 norm of each gradient after clipping.
    pub clipped_norms: Vec<f64>,
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Scales `g` by `1 / max(1, |g| / C)`, then nudges it down until the
/// computed norm is at most `C`.
fn clip(g: &[f64], clip_norm: f64) -> (Vec<f64>, f64) {
    let norm = l2_norm(g);
    let factor = (norm / clip_norm).max(1.0);
    let mut clipped: Vec<f64> = g.iter().map(|x| x / factor).collect();
    let mut clipped_norm = l2_norm(&clipped);
    while clipped_norm > clip_norm {
        for x in &mut clipped {
            *x *= 1.0 - f64::EPSILON;
        }
        clipped_norm = l2_norm(&clipped);
    }
    (clipped, clipped_norm)
}

/// One private aggregation step: clip each gradient to norm `C`, sum, add
/// `N(0, sigma^2 C^2 I)` noise, and divide by the batch size.
pub fn dp_sgd_step(batch: &GradientBatch) -> Result<DpSgdOutput, TheoryError> {
    if !(batch.clip_norm > 0.0 && batch.clip_norm.is_finite()) {
        return Err(TheoryError::InvalidParameter(format!(
            "clip norm must be positive, got {}",
            batch.clip_norm
        )));
    }
    if !(batch.noise_multiplier >= 0.0 && batch.noise_multiplier.is_finite()) {
        return Err(TheoryError::InvalidParameter(format!(
            "noise multiplier must be non-negative, got {}",
            batch.noise_multiplier
        )));
    }
    let dim = batch.dimension()?;

    let mut sum = vec![0.0; dim];
    let mut clipped_norms = Vec::with_capacity(batch.batch_size());
    for g in &batch.gradients {
        let (clipped, norm) = clip(g, batch.clip_norm);
        for (s, x) in sum.iter_mut().zip(&clipped) {
            *s += x;
        }
        clipped_norms.push(norm);
    }

    let noise_std = batch.noise_multiplier * batch.clip_norm;
    if noise_std > 0.0 {
        let mut rng = seeded(batch.seed);
        for s in &mut sum {
            let z: f64 = rng.sample(StandardNormal);
            *s += noise_std * z;
        }
    }
    let k = batch.batch_size() as f64;
    Ok(DpSgdOutput {
        noisy_mean: sum.into_iter().map(|s| s / k).collect(),
        clipped_norms,
    })
}
