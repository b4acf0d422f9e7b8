//! Shared helpers for the integration suites: a deterministic stream of
//! valid model parameters covering p in {1,2,3}, mu in [0.5, 8], m in
//! [0.05, v], with v fixed at 1 as in all the worked cases.

use reservoir_core::ModelParams;

pub struct SplitMix64(pub u64);

impl SplitMix64 {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }
}

pub fn random_params(count: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = SplitMix64(seed);
    (0..count)
        .map(|_| {
            let p = 1 + (rng.next_u64() % 3) as u32;
            let mu = 0.5 + 7.5 * rng.next_f64();
            let m = 0.05 + 0.95 * rng.next_f64();
            ModelParams::new(1.0, p, mu, m).unwrap()
        })
        .collect()
}
