//! Derivation of per-component seeds from a single master seed.
//!
//! A component seed is `splitmix64(master ^ fnv1a64(tag))`, where `tag` names
//! the consumer (`"split"`, `"smote"`, `"model"`, `"fold/3"`, ...). Streams are
//! reproducible within this implementation; nothing is promised across
//! languages.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

pub fn derive(master: u64, tag: &str) -> u64 {
    splitmix64(master ^ fnv1a64(tag))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, tag: &str) -> Rng {
    rng(derive(master, tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_streams() {
        assert_ne!(derive(7, "smote"), derive(7, "model"));
        assert_eq!(derive(7, "smote"), derive(7, "smote"));
        assert_ne!(derive(7, "smote"), derive(8, "smote"));
    }
}
