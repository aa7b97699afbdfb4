//! Generators for problem instances: uniform random sets with an exact
//! overlap, and adversarial contiguous blocks.

use alloc::vec::Vec;

use crate::channel::{ChannelSet, ProblemInstance};
use crate::rand::PrivateRandomness;
use crate::Error;

/// How the two channel sets are placed in the label space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Common set and private remainders drawn uniformly without replacement.
    Uniform,
    /// Both sets are contiguous blocks (modulo N) at a uniform random start,
    /// the second shifted to overlap the first in exactly n12 channels.
    Contiguous,
}

/// Size parameters of an instance family: set sizes are exact, placement is
/// the generator's choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceSpec {
    pub n_total: u32,
    pub n1: u32,
    pub n2: u32,
    pub n12: u32,
    pub layout: Layout,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |reason| {
            Err(Error::InfeasibleSpec {
                n_total: self.n_total,
                n1: self.n1,
                n2: self.n2,
                n12: self.n12,
                reason,
            })
        };
        if self.n_total < 2 {
            return fail("label space must hold at least 2 channels");
        }
        if self.n12 < 1 {
            return fail("common size must be at least 1");
        }
        if self.n12 > self.n1.min(self.n2) {
            return fail("common size exceeds a set size");
        }
        if u64::from(self.n1) + u64::from(self.n2) - u64::from(self.n12) > u64::from(self.n_total)
        {
            return fail("union does not fit in the label space");
        }
        Ok(())
    }

    /// Union size n1 + n2 - n12.
    pub fn union_size(&self) -> u32 {
        self.n1 + self.n2 - self.n12
    }

    /// Dispatch on the layout.
    pub fn generate(&self, rng: &PrivateRandomness) -> Result<ProblemInstance, Error> {
        match self.layout {
            Layout::Uniform => gen_uniform(self, rng),
            Layout::Contiguous => gen_contiguous(self, rng),
        }
    }
}

/// Draw the union without replacement and split it: the first n12 labels form
/// the common set, the next n1-n12 belong only to user 1, the rest only to
/// user 2. A partial shuffle of the label pool makes every split equally
/// likely, so sizes are exact and placement is uniform.
pub fn gen_uniform(spec: &InstanceSpec, rng: &PrivateRandomness) -> Result<ProblemInstance, Error> {
    spec.validate()?;
    if spec.layout != Layout::Uniform {
        return Err(Error::InvalidArgument("layout must be Uniform"));
    }
    let n = spec.n_total;
    let u = spec.union_size();
    let mut pool: Vec<u32> = (0..n).collect();
    for i in 0..u {
        let j = i + rng.pick(u64::from(i), n - i);
        pool.swap(i as usize, j as usize);
    }
    let n12 = spec.n12 as usize;
    let n1 = spec.n1 as usize;
    let u = u as usize;
    let mut labels1: Vec<u32> = pool[..n1].to_vec();
    let mut labels2: Vec<u32> = pool[..n12].to_vec();
    labels2.extend_from_slice(&pool[n1..u]);
    labels1.sort_unstable();
    labels2.sort_unstable();
    let c1 = ChannelSet::new(n, labels1)?;
    let c2 = ChannelSet::new(n, labels2)?;
    ProblemInstance::new(c1, c2)
}

/// The contiguous instance anchored at `start`: c1 occupies [start, start+n1)
/// and c2 occupies the block shifted by n1-n12, both modulo N, overlapping in
/// exactly n12 labels.
pub fn contiguous_at(spec: &InstanceSpec, start: u32) -> Result<ProblemInstance, Error> {
    spec.validate()?;
    if start >= spec.n_total {
        return Err(Error::InvalidArgument("start label outside [0, N)"));
    }
    let n = spec.n_total;
    let block = |from: u32, len: u32| -> Vec<u32> {
        let mut labels: Vec<u32> = (0..len)
            .map(|k| ((u64::from(from) + u64::from(k)) % u64::from(n)) as u32)
            .collect();
        labels.sort_unstable();
        labels
    };
    let c1 = ChannelSet::new(n, block(start, spec.n1))?;
    let shift = ((u64::from(start) + u64::from(spec.n1 - spec.n12)) % u64::from(n)) as u32;
    let c2 = ChannelSet::new(n, block(shift, spec.n2))?;
    ProblemInstance::new(c1, c2)
}

/// Contiguous instance at a uniform random start.
pub fn gen_contiguous(
    spec: &InstanceSpec,
    rng: &PrivateRandomness,
) -> Result<ProblemInstance, Error> {
    spec.validate()?;
    if spec.layout != Layout::Contiguous {
        return Err(Error::InvalidArgument("layout must be Contiguous"));
    }
    contiguous_at(spec, rng.pick(0, spec.n_total))
}
