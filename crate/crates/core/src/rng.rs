//! Counter-derived random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose key is a
//! hash of `(seed, domain, index...)`. Streams for different trees,
//! replicates or Boruta rounds never depend on the order in which they are
//! created, so parallel schedules reproduce sequential results bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Domain tags keep streams for unrelated purposes apart even when they
/// share a seed and index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    Tree = 0x7472_6565,
    Replicate = 0x7265_706c,
    BorutaRound = 0x626f_7275,
    Shadow = 0x7368_6164,
    Surrogate = 0x7375_7272,
    Forest = 0x666f_7265,
    Method = 0x6d65_7468,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a domain and an index.
pub fn derive_seed(seed: u64, domain: Domain, index: u64) -> u64 {
    let a = splitmix64(seed ^ splitmix64(domain as u64));
    splitmix64(a ^ splitmix64(index.wrapping_add(0xD1B5_4A32_D192_ED03)))
}

pub fn stream(seed: u64, domain: Domain, index: u64) -> Stream {
    let key = derive_seed(seed, domain, index);
    let mut bytes = [0u8; 32];
    for (i, chunk) in bytes.chunks_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(key ^ (i as u64).wrapping_mul(0xA24B_AED4_963E_E407)).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
