//! Seed hygiene: every independent task draws from its own ChaCha stream
//! derived from the master seed and a stable task identity, so results do not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stable 64-bit identity of a task (FNV-1a over its label and numeric parts).
pub fn task_id(label: &str, parts: &[u64]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let bytes = label.bytes().chain(parts.iter().flat_map(|p| p.to_le_bytes()));
    for b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Independent random stream for `(master_seed, label, parts)`.
pub fn stream(master_seed: u64, label: &str, parts: &[u64]) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(task_id(label, parts));
    rng
}
