//! Fixtures shared by the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use ssmtsp_core::{AcceptedInstances, GenParams, Instance};

/// The first `count` accepted instances with the default generator settings.
pub fn instances(n: usize, count: usize, seed: u64) -> Vec<Instance> {
    let params = GenParams::new(n, 8.0, 20.0, 0);
    AcceptedInstances::new(params, seed, 0)
        .expect("valid generator settings")
        .take(count)
        .collect()
}

/// `len` priorities drawn from `U[0, 1)`.
pub fn priorities(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<f64>()).collect()
}
