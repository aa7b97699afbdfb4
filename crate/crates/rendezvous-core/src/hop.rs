//! The six channel-hopping rules, each a pure function from (channel set,
//! time or hash value, randomness) to a channel.
//!
//! The locality-sensitive family all reduce to one primitive: map the
//! available channels through a permutation (or leave them in place), then hop
//! to the channel whose image is nearest at or after an origin point,
//! clockwise modulo N. Distinct channels have distinct images, so the argmin
//! is always unique; a tie would mean a logic bug and is asserted against.

use alloc::vec::Vec;

use crate::channel::{ChannelId, ChannelSet};
use crate::rand::{Permutation, PrivateRandomness};
use crate::Error;

/// A configured hop rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HopAlgorithm {
    /// Uniform pick from the own set each slot.
    Random,
    /// Hop to channel (t mod N) when available, patch with a uniform pick.
    SynMac,
    /// Nearest available channel at or after the slot's shared hash value.
    Lsh,
    /// Nearest permuted channel at or after a permuted slot index; bounds the
    /// worst-case rendezvous time by N under synchronized clocks.
    Lsh2,
    /// Nearest permuted channel at or after the slot's shared hash value.
    Lsh3,
    /// Mixed strategy: with probability p a uniform entry of a length-t0
    /// multiset of two-permutation hops, otherwise a uniform pick from the
    /// full set.
    Lsh4 { t0: u32, p: f64 },
}

impl HopAlgorithm {
    pub fn validate(&self) -> Result<(), Error> {
        if let HopAlgorithm::Lsh4 { t0, p } = self {
            if *t0 < 1 {
                return Err(Error::InvalidArgument("multiset length t0 must be at least 1"));
            }
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidArgument("mixing probability must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            HopAlgorithm::Random => "random",
            HopAlgorithm::SynMac => "synmac",
            HopAlgorithm::Lsh => "lsh",
            HopAlgorithm::Lsh2 => "lsh2",
            HopAlgorithm::Lsh3 => "lsh3",
            HopAlgorithm::Lsh4 { .. } => "lsh4",
        }
    }
}

impl core::fmt::Display for HopAlgorithm {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// The channel of `c` whose image is nearest at or after `origin`, measuring
/// clockwise distance (image - origin) mod N. `image` must be injective on
/// the set's labels.
pub(crate) fn cyclic_nearest(
    c: &ChannelSet,
    image: impl Fn(u32) -> u32,
    origin: u32,
) -> ChannelId {
    let n = u64::from(c.n_total());
    let mut best: Option<(u64, ChannelId)> = None;
    for &ch in c.channels() {
        let d = (u64::from(image(ch.0)) + n - u64::from(origin)) % n;
        best = match best {
            None => Some((d, ch)),
            Some((bd, bc)) => {
                assert_ne!(d, bd, "distinct channels must map to distinct distances");
                if d < bd {
                    Some((d, ch))
                } else {
                    Some((bd, bc))
                }
            }
        };
    }
    best.expect("channel sets are never empty").1
}

/// Hop of the plain hash rule: the available channel minimizing
/// (c_i - u) mod N. Returns `u` itself whenever `u` is available.
pub fn lsh_hop(c: &ChannelSet, u: u32) -> Result<ChannelId, Error> {
    if u >= c.n_total() {
        return Err(Error::InvalidArgument("hash value outside [0, N)"));
    }
    Ok(cyclic_nearest(c, |x| x, u))
}

/// Hop of the two-permutation rule: the available channel minimizing
/// (pi1(c_i) - pi2(t)) mod N for a slot index t below N.
pub fn lsh2_hop(
    c: &ChannelSet,
    pi1: &Permutation,
    pi2: &Permutation,
    t: u32,
) -> Result<ChannelId, Error> {
    if pi1.size() != c.n_total() || pi2.size() != c.n_total() {
        return Err(Error::InvalidArgument("permutation size must equal N"));
    }
    if t >= c.n_total() {
        return Err(Error::InvalidArgument("slot index outside [0, N)"));
    }
    let origin = pi2.apply(t);
    Ok(cyclic_nearest(c, |x| pi1.apply(x), origin))
}

/// Hop of the permuted hash rule: the available channel minimizing
/// (pi1(c_i) - u) mod N. With the identity permutation this is [`lsh_hop`].
pub fn lsh3_hop(c: &ChannelSet, pi1: &Permutation, u: u32) -> Result<ChannelId, Error> {
    if pi1.size() != c.n_total() {
        return Err(Error::InvalidArgument("permutation size must equal N"));
    }
    if u >= c.n_total() {
        return Err(Error::InvalidArgument("hash value outside [0, N)"));
    }
    Ok(cyclic_nearest(c, |x| pi1.apply(x), u))
}

/// A fixed-length bag of channels drawn from one user's set; duplicates are
/// expected and meaningful.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMultiset {
    entries: Vec<ChannelId>,
}

impl ChannelMultiset {
    pub fn entries(&self) -> &[ChannelId] {
        &self.entries
    }

    pub fn len(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The length-t0 multiset of two-permutation hops at slots 0..t0, the
/// precomputed dimension reduction of the mixed strategy.
pub fn lsh4_build_multiset(
    c: &ChannelSet,
    pi1: &Permutation,
    pi2: &Permutation,
    t0: u32,
) -> Result<ChannelMultiset, Error> {
    if t0 < 1 {
        return Err(Error::InvalidArgument("multiset length t0 must be at least 1"));
    }
    if t0 > c.n_total() {
        return Err(Error::InvalidArgument(
            "multiset length t0 cannot exceed N, slot permutation ends there",
        ));
    }
    let mut entries = Vec::with_capacity(t0 as usize);
    for t in 0..t0 {
        entries.push(lsh2_hop(c, pi1, pi2, t)?);
    }
    Ok(ChannelMultiset { entries })
}

/// One slot of the mixed strategy: with probability `p` a uniform entry of
/// `ms`, otherwise a uniform element of `c`. The coin and the element pick
/// consume separate private draws at the same index.
pub fn lsh4_hop(
    c: &ChannelSet,
    ms: &ChannelMultiset,
    p: f64,
    rand: &PrivateRandomness,
    draw_index: u64,
) -> ChannelId {
    let picked = if rand.coin(draw_index, p) {
        ms.entries[rand.pick(draw_index, ms.len()) as usize]
    } else {
        c.nth(rand.pick(draw_index, c.size()))
    };
    debug_assert!(c.contains(picked), "multiset must be built from the same set");
    picked
}

/// Period-N schedule hop: channel (t mod N) when available, otherwise a
/// uniform patch pick from the own set.
pub fn synmac_hop(c: &ChannelSet, t: u64, rand: &PrivateRandomness, draw_index: u64) -> ChannelId {
    let label = (t % u64::from(c.n_total())) as u32;
    if c.contains(ChannelId(label)) {
        ChannelId(label)
    } else {
        c.nth(rand.pick(draw_index, c.size()))
    }
}

/// Uniform pick from the own set.
pub fn random_hop(c: &ChannelSet, rand: &PrivateRandomness, draw_index: u64) -> ChannelId {
    c.nth(rand.pick(draw_index, c.size()))
}
