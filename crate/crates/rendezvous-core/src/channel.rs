//! Channel identifiers, per-user channel sets, and rendezvous instances.

use alloc::vec::Vec;

use crate::theory::InstanceProfile;
use crate::Error;

/// A channel label in [0, N) for the enclosing instance's N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl core::fmt::Display for ChannelId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One user's available channels inside a global label space of `n_total`
/// channels. Stored strictly increasing; never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSet {
    n_total: u32,
    channels: Vec<ChannelId>,
}

impl ChannelSet {
    /// Builds a set from arbitrary-order labels, sorting them and rejecting
    /// duplicates, out-of-range labels, and the empty set.
    pub fn new(n_total: u32, mut labels: Vec<u32>) -> Result<Self, Error> {
        if labels.is_empty() {
            return Err(Error::InvalidInstance("channel set must be nonempty"));
        }
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("channel labels must be distinct"));
        }
        if *labels.last().unwrap() >= n_total {
            return Err(Error::InvalidInstance("channel label outside [0, N)"));
        }
        Ok(Self {
            n_total,
            channels: labels.into_iter().map(ChannelId).collect(),
        })
    }

    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    /// Number of available channels (the n_i of this set).
    pub fn size(&self) -> u32 {
        self.channels.len() as u32
    }

    pub fn channels(&self) -> &[ChannelId] {
        &self.channels
    }

    pub fn contains(&self, id: ChannelId) -> bool {
        self.channels.binary_search(&id).is_ok()
    }

    /// Channel at sorted position `i`; `i` must be below `size()`.
    pub fn nth(&self, i: u32) -> ChannelId {
        self.channels[i as usize]
    }
}

/// Number of channels available to both sets.
pub fn intersection_size(c1: &ChannelSet, c2: &ChannelSet) -> Result<u32, Error> {
    if c1.n_total != c2.n_total {
        return Err(Error::InvalidInstance(
            "channel sets live in different label spaces",
        ));
    }
    let mut count = 0;
    let mut rest = c2.channels.as_slice();
    for id in &c1.channels {
        match rest.binary_search(id) {
            Ok(pos) => {
                count += 1;
                rest = &rest[pos + 1..];
            }
            Err(pos) => rest = &rest[pos..],
        }
    }
    Ok(count)
}

/// A pair of channel sets with at least one commonly available channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    n_total: u32,
    c1: ChannelSet,
    c2: ChannelSet,
    n12: u32,
}

impl ProblemInstance {
    pub fn new(c1: ChannelSet, c2: ChannelSet) -> Result<Self, Error> {
        let n12 = intersection_size(&c1, &c2)?;
        if c1.n_total < 2 {
            return Err(Error::InvalidInstance("label space needs at least 2 channels"));
        }
        if n12 == 0 {
            return Err(Error::InvalidInstance(
                "users share no channel, rendezvous is impossible",
            ));
        }
        Ok(Self {
            n_total: c1.n_total,
            c1,
            c2,
            n12,
        })
    }

    pub fn n_total(&self) -> u32 {
        self.n_total
    }

    pub fn c1(&self) -> &ChannelSet {
        &self.c1
    }

    pub fn c2(&self) -> &ChannelSet {
        &self.c2
    }

    pub fn n1(&self) -> u32 {
        self.c1.size()
    }

    pub fn n2(&self) -> u32 {
        self.c2.size()
    }

    pub fn n12(&self) -> u32 {
        self.n12
    }

    pub fn jaccard(&self) -> f64 {
        f64::from(self.n12) / f64::from(self.n1() + self.n2() - self.n12)
    }

    pub fn profile(&self) -> InstanceProfile {
        // Construction already guarantees 1 <= n12 <= min(n1, n2).
        InstanceProfile::new(self.n1(), self.n2(), self.n12).unwrap()
    }
}

/// Time to rendezvous, in slots. Success in the very first slot of an attempt
/// is value 1, so an independent per-slot success probability P makes the
/// sample geometric with mean 1/P.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TtrSample(u32);

impl TtrSample {
    pub fn new(value: u32) -> Self {
        assert!(value >= 1, "time to rendezvous counts from 1");
        Self(value)
    }

    pub fn value(self) -> u32 {
        self.0
    }
}
