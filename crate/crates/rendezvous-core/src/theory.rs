//! Closed-form quantities: exact baselines, limits, and the analytic
//! approximations used as oracle values and as the theory columns of output
//! tables. All formulas work on the size profile (n1, n2, n12) alone.

use crate::Error;

/// Size profile of an instance: set sizes n1, n2 and overlap n12, with the
/// union size u = n1 + n2 - n12 derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceProfile {
    n1: u32,
    n2: u32,
    n12: u32,
}

impl InstanceProfile {
    pub fn new(n1: u32, n2: u32, n12: u32) -> Result<Self, Error> {
        if n12 < 1 || n12 > n1.min(n2) {
            return Err(Error::InvalidArgument(
                "profile requires 1 <= n12 <= min(n1, n2)",
            ));
        }
        Ok(Self { n1, n2, n12 })
    }

    pub fn n1(&self) -> u32 {
        self.n1
    }

    pub fn n2(&self) -> u32 {
        self.n2
    }

    pub fn n12(&self) -> u32 {
        self.n12
    }

    pub fn union_size(&self) -> u32 {
        self.n1 + self.n2 - self.n12
    }
}

/// Jaccard index n12 / (n1 + n2 - n12), in (0, 1].
pub fn jaccard(p: &InstanceProfile) -> f64 {
    f64::from(p.n12) / f64::from(p.union_size())
}

/// Expected time to rendezvous of independent uniform picks: n1 n2 / n12.
pub fn random_ettr(p: &InstanceProfile) -> f64 {
    f64::from(p.n1) * f64::from(p.n2) / f64::from(p.n12)
}

/// Lower bound (n1 n2 + 1) / (n12 + 1) on the ETTR of any algorithm.
pub fn ettr_lower_bound(p: &InstanceProfile) -> f64 {
    (f64::from(p.n1) * f64::from(p.n2) + 1.0) / (f64::from(p.n12) + 1.0)
}

/// Large-N limit 1/J of the two-permutation scheme's ETTR.
pub fn lsh2_limit_ettr(p: &InstanceProfile) -> f64 {
    1.0 / jaccard(p)
}

/// The three disjoint ways one slot of the permuted-hash scheme with
/// independent hash values collides on a common channel, each summed over all
/// n12 common channels. `total()` is the slot collision probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lsh3ProbTerms {
    /// Both hash values fall in the segment owned by the same common channel:
    /// 2 n12 / (u (u+1)).
    pub same_segment: f64,
    /// User 2's hash lands behind a run of channels held only by user 1 and
    /// skips forward to the common channel: (n12 / u^2) (n1 - n12) / n2.
    pub user2_skips_past_user1: f64,
    /// The mirror case with the users exchanged: (n12 / u^2) (n2 - n12) / n1.
    pub user1_skips_past_user2: f64,
}

impl Lsh3ProbTerms {
    pub fn total(&self) -> f64 {
        self.same_segment + self.user2_skips_past_user1 + self.user1_skips_past_user2
    }
}

/// Per-case breakdown of [`lsh3_prob_approx`], exposed so simulations can be
/// compared term by term.
pub fn lsh3_prob_terms(p: &InstanceProfile) -> Lsh3ProbTerms {
    let u = f64::from(p.union_size());
    let n1 = f64::from(p.n1);
    let n2 = f64::from(p.n2);
    let n12 = f64::from(p.n12);
    Lsh3ProbTerms {
        same_segment: 2.0 * n12 / (u * (u + 1.0)),
        user2_skips_past_user1: n12 / (u * u) * ((n1 - n12) / n2),
        user1_skips_past_user2: n12 / (u * u) * ((n2 - n12) / n1),
    }
}

/// Approximate per-slot rendezvous probability of the permuted-hash scheme
/// under independent hash values (asynchronous clocks):
/// 2 n12 / (u (u+1)) + (n12 / u^2) ((n1 - n12)/n2 + (n2 - n12)/n1).
pub fn lsh3_prob_approx(p: &InstanceProfile) -> f64 {
    lsh3_prob_terms(p).total()
}

/// Reciprocal of [`lsh3_prob_approx`]; the slot trials are treated as
/// independent, which the simulation engine cross-checks empirically.
pub fn lsh3_ettr_approx(p: &InstanceProfile) -> f64 {
    1.0 / lsh3_prob_approx(p)
}

/// Approximate ETTR of the mixed strategy that draws from a t0-entry hop
/// multiset with probability `mix` and from the full set otherwise:
/// 1 / ((1 - mix^2) n12/(n1 n2) + mix^2 J / t0).
pub fn lsh4_ettr_approx(p: &InstanceProfile, t0: u32, mix: f64) -> Result<f64, Error> {
    if t0 < 1 {
        return Err(Error::InvalidArgument("multiset length t0 must be at least 1"));
    }
    if !(0.0..=1.0).contains(&mix) {
        return Err(Error::InvalidArgument("mixing probability must lie in [0, 1]"));
    }
    let n1 = f64::from(p.n1);
    let n2 = f64::from(p.n2);
    let n12 = f64::from(p.n12);
    let m2 = mix * mix;
    Ok(1.0 / ((1.0 - m2) * n12 / (n1 * n2) + m2 * jaccard(p) / f64::from(t0)))
}

/// Largest multiset length for which the mixed strategy still beats the
/// random baseline: n1 n2 / u. Strictly below this bound the approximate
/// ETTR is strictly smaller than n1 n2 / n12 for every mix > 0.
pub fn lsh4_t0_bound(p: &InstanceProfile) -> f64 {
    f64::from(p.n1) * f64::from(p.n2) / f64::from(p.union_size())
}
