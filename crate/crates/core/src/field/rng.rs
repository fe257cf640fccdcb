use rand::rngs::OsRng;
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Randomness for dealing and refresh: either a seeded ChaCha20 stream
/// (reproducible runs) or the operating system's CSPRNG.
#[allow(clippy::large_enum_variant)]
pub enum Randomness {
    Seeded { seed: u64, rng: ChaCha20Rng },
    Os(OsRng),
}

impl Randomness {
    pub fn seeded(seed: u64) -> Self {
        Randomness::Seeded { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn os() -> Self {
        Randomness::Os(OsRng)
    }

    /// Seeded when a seed is given, OS-backed otherwise.
    pub fn from_seed(seed: Option<u64>) -> Self {
        seed.map_or_else(Self::os, Self::seeded)
    }

    /// Resumes a seeded stream at a saved word position.
    pub fn resume(seed: u64, word_pos: u128) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_word_pos(word_pos);
        Randomness::Seeded { seed, rng }
    }

    /// `(seed, word position)` for a seeded stream.
    pub fn position(&self) -> Option<(u64, u128)> {
        match self {
            Randomness::Seeded { seed, rng } => Some((*seed, rng.get_word_pos())),
            Randomness::Os(_) => None,
        }
    }
}

impl RngCore for Randomness {
    fn next_u32(&mut self) -> u32 {
        match self {
            Randomness::Seeded { rng, .. } => rng.next_u32(),
            Randomness::Os(rng) => rng.next_u32(),
        }
    }

    fn next_u64(&mut self) -> u64 {
        match self {
            Randomness::Seeded { rng, .. } => rng.next_u64(),
            Randomness::Os(rng) => rng.next_u64(),
        }
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        match self {
            Randomness::Seeded { rng, .. } => rng.fill_bytes(dest),
            Randomness::Os(rng) => rng.fill_bytes(dest),
        }
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        match self {
            Randomness::Seeded { rng, .. } => rng.try_fill_bytes(dest),
            Randomness::Os(rng) => rng.try_fill_bytes(dest),
        }
    }
}

impl CryptoRng for Randomness {}
