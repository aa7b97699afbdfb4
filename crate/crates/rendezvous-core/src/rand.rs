//! Deterministic, counter-addressable randomness.
//!
//! Every draw is a pure function of (seed, stream tag, index), computed by
//! chaining a splitmix64-style finalizer. Nothing is stateful: U(t) can be
//! evaluated at any t without generating a prefix (the clock-drift model needs
//! exactly that), concurrent readers need no synchronization, and replays are
//! bit-exact on every platform because only integer arithmetic is involved.

use alloc::vec::Vec;

use crate::Error;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer; a bijection on u64.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// FNV-1a over the tag bytes, finalized with mix64.
fn stream_key(tag: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for &b in tag.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(h)
}

/// Derives a child seed for a labeled, indexed subcomponent of a run.
///
/// The simulation engine derives every per-experiment and per-attempt seed
/// through this function, so any unit of work can be recomputed in isolation.
pub fn derive_seed(parent: u64, label: &str, index: u64) -> u64 {
    Prf { seed: parent }.word(stream_key(label), index, 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Prf {
    seed: u64,
}

impl Prf {
    /// Raw word at (stream, index); `attempt` walks rejection retries.
    #[inline]
    fn word(&self, stream: u64, index: u64, attempt: u64) -> u64 {
        let k = mix64(self.seed ^ stream).wrapping_add(GOLDEN);
        let i = mix64(index.wrapping_add(GOLDEN)).wrapping_add(attempt.wrapping_mul(GOLDEN));
        mix64(k ^ i)
    }

    /// Unbiased uniform value in [0, n) via multiply-shift rejection.
    fn bounded(&self, stream: u64, index: u64, n: u32) -> u32 {
        debug_assert!(n >= 1);
        let n64 = u64::from(n);
        let mut attempt = 0u64;
        let mut m = u128::from(self.word(stream, index, attempt)) * u128::from(n64);
        if (m as u64) < n64 {
            let threshold = n64.wrapping_neg() % n64;
            while (m as u64) < threshold {
                attempt += 1;
                m = u128::from(self.word(stream, index, attempt)) * u128::from(n64);
            }
        }
        (m >> 64) as u32
    }

    /// Uniform in [0, 1), 53 mantissa bits.
    fn unit(&self, stream: u64, index: u64) -> f64 {
        (self.word(stream, index, 0) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Randomness common to both users: the per-slot hash values U(t) and the
/// channel/slot permutations. Both users of an attempt hold the same seed;
/// that agreement is what makes hash collisions possible at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedRandomness {
    prf: Prf,
}

impl SharedRandomness {
    pub fn new(seed: u64) -> Self {
        Self { prf: Prf { seed } }
    }

    pub fn seed(&self) -> u64 {
        self.prf.seed
    }

    /// U(t): uniform over [0, n), addressable at any t in any query order.
    pub fn uniform(&self, t: u64, n: u32) -> u32 {
        self.prf.bounded(stream_key("U"), t, n)
    }

    /// Seeded uniform permutation on [0, size), deterministic per (seed, tag, size).
    ///
    /// Distinct tags ("pi1", "pi2", ...) give statistically independent
    /// permutations, and all tags are independent of the "U" stream.
    pub fn permutation(&self, tag: &str, size: u32) -> Result<Permutation, Error> {
        if size == 0 {
            return Err(Error::InvalidArgument("permutation size must be at least 1"));
        }
        let key = stream_key(tag);
        let mut forward: Vec<u32> = (0..size).collect();
        for i in (1..size).rev() {
            let j = self.prf.bounded(key, u64::from(i), i + 1);
            forward.swap(i as usize, j as usize);
        }
        Ok(Permutation::from_parts(forward))
    }
}

/// Builds a permutation from a shared randomness stream; see
/// [`SharedRandomness::permutation`].
pub fn make_permutation(rand: &SharedRandomness, tag: &str, size: u32) -> Result<Permutation, Error> {
    rand.permutation(tag, size)
}

/// Per-user randomness for choices made locally: the random rule's pick,
/// patching, and the mixed strategy's coin and element selection. Draws are
/// independent of every [`SharedRandomness`] stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrivateRandomness {
    prf: Prf,
}

impl PrivateRandomness {
    pub fn new(seed: u64) -> Self {
        Self { prf: Prf { seed } }
    }

    pub fn seed(&self) -> u64 {
        self.prf.seed
    }

    /// Uniform pick in [0, n); one value per draw index.
    pub fn pick(&self, draw_index: u64, n: u32) -> u32 {
        self.prf.bounded(stream_key("pick"), draw_index, n)
    }

    /// Bernoulli(p) coin; independent of `pick` at every draw index.
    pub fn coin(&self, draw_index: u64, p: f64) -> bool {
        debug_assert!((0.0..=1.0).contains(&p));
        self.prf.unit(stream_key("coin"), draw_index) < p
    }
}

/// A bijection on [0, size) together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl Permutation {
    pub fn identity(size: u32) -> Self {
        let forward: Vec<u32> = (0..size).collect();
        let inverse = forward.clone();
        Self { forward, inverse }
    }

    /// Validates that `forward` is a bijection on [0, len) and takes it over.
    pub fn from_forward(forward: Vec<u32>) -> Result<Self, Error> {
        let size = forward.len() as u32;
        let mut inverse: Vec<u32> = alloc::vec![u32::MAX; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            if y >= size {
                return Err(Error::InvalidArgument("permutation image out of range"));
            }
            if inverse[y as usize] != u32::MAX {
                return Err(Error::InvalidArgument("permutation image repeated"));
            }
            inverse[y as usize] = x as u32;
        }
        Ok(Self { forward, inverse })
    }

    // Construction for internally generated bijections; skips validation.
    fn from_parts(forward: Vec<u32>) -> Self {
        let mut inverse: Vec<u32> = alloc::vec![0; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            inverse[y as usize] = x as u32;
        }
        Self { forward, inverse }
    }

    pub fn size(&self) -> u32 {
        self.forward.len() as u32
    }

    /// Forward map; `x` must be below `size()`.
    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.forward[x as usize]
    }

    /// Inverse map; `y` must be below `size()`.
    #[inline]
    pub fn invert(&self, y: u32) -> u32 {
        self.inverse[y as usize]
    }
}
