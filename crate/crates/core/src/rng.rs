//! Seeded randomness. Every random choice in the crate flows from one 64-bit
//! seed; independent consumers take separate ChaCha streams of that seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Stream identifiers, so that unrelated consumers of the same seed never
/// share random bits.
pub mod stream {
    pub const PERTURB: u64 = 1;
    pub const SUBSPACE: u64 = 2;
    pub const CANTOR: u64 = 3;
    pub const SIMPLEX: u64 = 4;
    pub const AUDIT: u64 = 5;
    pub const NET: u64 = 6;
}

pub fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Derives a child seed; used to give each stage or sample its own seed.
pub fn child_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(index.wrapping_add(0x100));
    rng.gen()
}

pub fn normal_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform unit vector.
pub fn unit_vec<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v = normal_vec(rng, dim);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the open ball of the given radius around the origin.
pub fn in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<f64> {
    let dir = unit_vec(rng, dim);
    // u in [0, 1): the sample is strictly inside the ball.
    let u: f64 = rng.gen::<f64>();
    let s = radius * u.powf(1.0 / dim as f64);
    dir.into_iter().map(|x| x * s).collect()
}
