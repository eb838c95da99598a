//! Seeded sampling of admissible parameter points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SuiteError;
use crate::expr_dsl::DomainPredicate;

/// Attempts allowed per requested point before giving up.
const ATTEMPTS_PER_POINT: usize = 10_000;

/// Draws `count` points of dimension `d` satisfying every predicate with
/// `margin` to spare. With a norm bound the draws are uniform in the shrunken
/// ball; otherwise uniform in the box [−1, 1]^d. Other predicates are applied
/// by rejection.
pub fn sample_points(
    domain: &[DomainPredicate],
    d: usize,
    count: usize,
    seed: u64,
    margin: f64,
) -> Result<Vec<Vec<f64>>, SuiteError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = domain.iter().find_map(|p| match p {
        DomainPredicate::NormBelow(c) => Some(c - margin),
        _ => None,
    });
    if matches!(radius, Some(r) if r <= 0.0) {
        return Err(SuiteError::Sampling(format!(
            "norm bound leaves no room for margin {margin}"
        )));
    }
    let mut points = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while points.len() < count {
        attempts += 1;
        if attempts > ATTEMPTS_PER_POINT * count.max(1) {
            return Err(SuiteError::Sampling(format!(
                "found only {} of {count} admissible points",
                points.len()
            )));
        }
        let x: Vec<f64> = match radius {
            Some(r) => {
                let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm == 0.0 {
                    continue;
                }
                let scale = r * rng.random::<f64>().powf(1.0 / d as f64) / norm;
                dir.iter().map(|v| v * scale).collect()
            }
            None => (0..d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        if domain.iter().all(|p| p.admits(&x, margin)) {
            points.push(x);
        }
    }
    Ok(points)
}
