use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A named, reproducible source of uniform draws.
///
/// The generator key is SHA-256 of `(master_seed, replication, name)`, so every
/// stream is fixed by those three values alone and streams with different
/// names do not overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    name: String,
    master_seed: u64,
    replication: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, replication: u64, name: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(master_seed.to_le_bytes());
        hasher.update(replication.to_le_bytes());
        hasher.update(name.as_bytes());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        RngStream {
            name: name.to_owned(),
            master_seed,
            replication,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn replication(&self) -> u64 {
        self.replication
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Uniform on `(0, 1]`, for transforms that take a logarithm.
    pub fn unit_open_low(&mut self) -> f64 {
        1.0 - self.unit()
    }
}
