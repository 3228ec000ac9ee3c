use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::scalar::Scalar;
use crate::solver::WavefieldRecord;

/// Adds i.i.d. zero-mean Gaussian noise of standard deviation `sigma` (m)
/// from a generator seeded with `seed`. Samples are drawn position-major.
pub fn add_measurement_noise<T: Scalar>(
    record: &WavefieldRecord<T>,
    sigma: T,
    seed: u64,
) -> WavefieldRecord<T> {
    if sigma <= T::zero() {
        return record.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma.to_f64_lossy()).expect("finite sigma");
    let samples = record
        .samples
        .iter()
        .map(|row| {
            row.iter()
                .map(|&u| u + T::lit(normal.sample(&mut rng)))
                .collect()
        })
        .collect();
    WavefieldRecord {
        samples,
        ..record.clone()
    }
}
