//! Exact brute-force probabilities and mean rendezvous times on tiny
//! instances, by full enumeration of the randomness.
//!
//! These functions exist to pin identities with zero tolerance, so all
//! arithmetic is exact: favorable cases are counted in machine integers and
//! divided as big rationals only at the end. Floating point appears solely in
//! `to_f64` for reporting. Enumeration cost explodes factorially, hence each
//! operation refuses label spaces beyond its documented guard.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::channel::ProblemInstance;
use crate::hop::cyclic_nearest;
use crate::Error;

/// An exact rational produced by enumeration. Probability-valued operations
/// keep it in [0, 1]; the mean-TTR operation reuses the same carrier with
/// values in [1, N] slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProb {
    value: Ratio<BigInt>,
}

impl ExactProb {
    fn from_counts(favorable: u64, total: u64) -> Self {
        Self {
            value: Ratio::new(BigInt::from(favorable), BigInt::from(total)),
        }
    }

    pub fn from_ints(numerator: u64, denominator: u64) -> Result<Self, Error> {
        if denominator == 0 {
            return Err(Error::InvalidArgument("denominator must be positive"));
        }
        Ok(Self::from_counts(numerator, denominator))
    }

    pub fn as_ratio(&self) -> &Ratio<BigInt> {
        &self.value
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

impl core::fmt::Display for ExactProb {
    /// Reduced fraction, or a bare integer when the denominator is 1.
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Visit every permutation of 0..n, Heap's algorithm, starting from identity.
fn for_each_permutation(n: u32, mut f: impl FnMut(&[u32])) {
    let n = n as usize;
    let mut a: Vec<u32> = (0..n as u32).collect();
    let mut c = alloc::vec![0usize; n];
    f(&a);
    let mut i = 0usize;
    while i < n {
        if c[i] < i {
            if i.is_multiple_of(2) {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn guard(n: u32, max_supported: u32) -> Result<(), Error> {
    if n > max_supported {
        return Err(Error::GuardViolation {
            n_total: n,
            max_supported,
        });
    }
    Ok(())
}

fn factorial(n: u32) -> u64 {
    (1..=u64::from(n)).product()
}

/// Exact single-slot rendezvous probability of the two-permutation rule:
/// enumerate every channel permutation and every value of the (uniformly
/// distributed) permuted slot index, count the cases where both users land on
/// the same channel. Guard: N <= 8.
pub fn exact_prob_lsh2(inst: &ProblemInstance) -> Result<ExactProb, Error> {
    let n = inst.n_total();
    guard(n, 8)?;
    let mut favorable = 0u64;
    for_each_permutation(n, |pi1| {
        for origin in 0..n {
            let h1 = cyclic_nearest(inst.c1(), |x| pi1[x as usize], origin);
            let h2 = cyclic_nearest(inst.c2(), |x| pi1[x as usize], origin);
            if h1 == h2 {
                favorable += 1;
            }
        }
    });
    Ok(ExactProb::from_counts(favorable, factorial(n) * u64::from(n)))
}

/// Exact single-slot rendezvous probability of the permuted-hash rule.
/// With `drift_nonzero` the users read independent uniform hash values
/// (the drifted regime); without it they share one value, which is the same
/// marginal as the two-permutation rule. Guard: N <= 7.
pub fn exact_prob_lsh3(inst: &ProblemInstance, drift_nonzero: bool) -> Result<ExactProb, Error> {
    let n = inst.n_total();
    guard(n, 7)?;
    let mut favorable = 0u64;
    for_each_permutation(n, |pi1| {
        let hops = |c: &crate::channel::ChannelSet| -> Vec<u32> {
            (0..n)
                .map(|u| cyclic_nearest(c, |x| pi1[x as usize], u).0)
                .collect()
        };
        let h1 = hops(inst.c1());
        let h2 = hops(inst.c2());
        if drift_nonzero {
            // Independent (u1, u2): convolve per-channel landing counts.
            let mut count1 = alloc::vec![0u64; n as usize];
            let mut count2 = alloc::vec![0u64; n as usize];
            for u in 0..n as usize {
                count1[h1[u] as usize] += 1;
                count2[h2[u] as usize] += 1;
            }
            for ch in 0..n as usize {
                favorable += count1[ch] * count2[ch];
            }
        } else {
            for u in 0..n as usize {
                if h1[u] == h2[u] {
                    favorable += 1;
                }
            }
        }
    });
    let per_pi = if drift_nonzero {
        u64::from(n) * u64::from(n)
    } else {
        u64::from(n)
    };
    Ok(ExactProb::from_counts(favorable, factorial(n) * per_pi))
}

/// Exact synchronized mean TTR of the two-permutation rule: enumerate every
/// (channel permutation, slot permutation) pair and average the first
/// collision slot. Every pair collides within N slots, so the mean lies in
/// [1, N]. Guard: N <= 6.
pub fn exact_ettr_sync_lsh2(inst: &ProblemInstance) -> Result<ExactProb, Error> {
    let n = inst.n_total();
    guard(n, 6)?;
    let mut total_slots = 0u64;
    for_each_permutation(n, |pi1| {
        // Whether the users collide when the permuted slot index equals s.
        let collide: Vec<bool> = (0..n)
            .map(|s| {
                cyclic_nearest(inst.c1(), |x| pi1[x as usize], s)
                    == cyclic_nearest(inst.c2(), |x| pi1[x as usize], s)
            })
            .collect();
        for_each_permutation(n, |pi2| {
            let t = (0..n as usize)
                .position(|t| collide[pi2[t] as usize])
                .expect("a common channel forces a collision within N slots");
            total_slots += t as u64 + 1;
        });
    });
    let pairs = factorial(n) * factorial(n);
    Ok(ExactProb::from_counts(total_slots, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSet;
    use crate::hop::HopAlgorithm;
    use crate::sim::{estimate_prob, run_experiment, Setting, SimulationConfig};

    fn inst(n: u32, l1: &[u32], l2: &[u32]) -> ProblemInstance {
        ProblemInstance::new(
            ChannelSet::new(n, l1.to_vec()).unwrap(),
            ChannelSet::new(n, l2.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn jaccard_ratio(i: &ProblemInstance) -> ExactProb {
        let u = i.c1().size() + i.c2().size() - i.n12();
        ExactProb::from_ints(u64::from(i.n12()), u64::from(u)).unwrap()
    }

    #[test]
    fn permutation_visitor_hits_every_arrangement_once() {
        let mut seen = alloc::vec::Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        seen.sort();
        assert_eq!(seen.len(), 6);
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn two_permutation_probability_on_the_pinned_instance_is_one_third() {
        let i = inst(5, &[0, 1], &[1, 2]);
        let exact = exact_prob_lsh2(&i).unwrap();
        assert_eq!(exact, ExactProb::from_ints(1, 3).unwrap());
        assert_eq!(alloc::format!("{exact}"), "1/3");
    }

    #[test]
    fn two_permutation_probability_equals_the_overlap_ratio_exactly() {
        let cases = [
            inst(4, &[0, 1], &[1, 2]),
            inst(5, &[0, 1, 2], &[2, 3]),
            inst(6, &[0, 1, 2], &[1, 2, 3]),
            inst(6, &[0, 3, 5], &[1, 3, 4, 5]),
            inst(6, &[2], &[2]),
            inst(7, &[0, 1, 2, 3, 4, 5, 6], &[0, 1, 2, 3, 4, 5, 6]),
        ];
        for i in &cases {
            assert_eq!(exact_prob_lsh2(i).unwrap(), jaccard_ratio(i));
        }
    }

    #[test]
    fn identical_sets_always_collide() {
        let i = inst(5, &[1, 3], &[1, 3]);
        let exact = exact_prob_lsh2(&i).unwrap();
        assert_eq!(exact, ExactProb::from_ints(1, 1).unwrap());
        assert_eq!(alloc::format!("{exact}"), "1");
    }

    #[test]
    fn permuted_hash_probability_on_full_sets_is_one_over_n() {
        let full: Vec<u32> = (0..4).collect();
        let i = inst(4, &full, &full);
        let exact = exact_prob_lsh3(&i, true).unwrap();
        assert_eq!(exact, ExactProb::from_ints(1, 4).unwrap());
    }

    #[test]
    fn permuted_hash_probability_on_singletons_is_one() {
        let i = inst(5, &[3], &[3]);
        assert_eq!(
            exact_prob_lsh3(&i, true).unwrap(),
            ExactProb::from_ints(1, 1).unwrap()
        );
    }

    #[test]
    fn undrifted_permuted_hash_marginal_matches_the_two_permutation_rule() {
        let cases = [
            inst(5, &[0, 1], &[1, 2]),
            inst(6, &[0, 1, 2], &[1, 2, 3]),
            inst(6, &[0, 2, 4], &[2, 3]),
        ];
        for i in &cases {
            assert_eq!(
                exact_prob_lsh3(i, false).unwrap(),
                exact_prob_lsh2(i).unwrap()
            );
        }
    }

    #[test]
    fn drifted_exact_value_and_the_large_n_approximation_agree_in_magnitude() {
        let i = inst(6, &[0, 1, 2], &[1, 2, 3]);
        let exact = exact_prob_lsh3(&i, true).unwrap().to_f64();
        let approx = crate::theory::lsh3_prob_approx(&i.profile());
        let ratio = exact / approx;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "exact {exact} approx {approx}"
        );
    }

    #[test]
    fn exact_mean_time_is_one_for_identical_sets() {
        for n in 2..=5u32 {
            let labels: Vec<u32> = (0..n).step_by(2).collect();
            let i = inst(n, &labels, &labels);
            assert_eq!(
                exact_ettr_sync_lsh2(&i).unwrap(),
                ExactProb::from_ints(1, 1).unwrap()
            );
        }
    }

    #[test]
    fn exact_mean_time_respects_the_worst_case_bound() {
        let cases = [
            inst(4, &[0, 1], &[1, 2]),
            inst(5, &[0, 1], &[1, 2]),
            inst(6, &[0, 1, 2], &[2, 3, 4]),
        ];
        for i in &cases {
            let mean = exact_ettr_sync_lsh2(i).unwrap().to_f64();
            assert!(mean >= 1.0);
            assert!(mean <= f64::from(i.n_total()));
        }
    }

    #[test]
    fn enumeration_guards_fire_just_past_their_limits() {
        let big = |n: u32| {
            let labels: Vec<u32> = (0..n / 2).collect();
            inst(n, &labels, &labels)
        };
        assert!(matches!(
            exact_prob_lsh2(&big(9)),
            Err(Error::GuardViolation {
                max_supported: 8,
                ..
            })
        ));
        assert!(matches!(
            exact_prob_lsh3(&big(8), true),
            Err(Error::GuardViolation {
                max_supported: 7,
                ..
            })
        ));
        assert!(matches!(
            exact_ettr_sync_lsh2(&big(7)),
            Err(Error::GuardViolation {
                max_supported: 6,
                ..
            })
        ));
        assert!(exact_prob_lsh2(&big(8)).is_ok());
    }

    #[test]
    fn monte_carlo_single_slot_estimates_converge_to_the_oracle() {
        let i = inst(6, &[0, 1, 2], &[1, 2, 3]);
        let samples = 30_000u64;
        let sync = SimulationConfig {
            setting: Setting::Sync,
            slots_budget: 1,
            experiments: 1,
            base_seed: 314,
            ..SimulationConfig::default()
        };
        let p2 = exact_prob_lsh2(&i).unwrap().to_f64();
        let est2 = estimate_prob(&i, HopAlgorithm::Lsh2, &sync, samples).unwrap();
        let sigma2 = (p2 * (1.0 - p2) / samples as f64).sqrt();
        assert!((est2 - p2).abs() < 3.0 * sigma2, "est {est2} exact {p2}");

        let mut drifted = sync;
        drifted.setting = Setting::Async;
        let p3 = exact_prob_lsh3(&i, true).unwrap().to_f64();
        let est3 = estimate_prob(&i, HopAlgorithm::Lsh3, &drifted, samples).unwrap();
        let sigma3 = (p3 * (1.0 - p3) / samples as f64).sqrt();
        assert!((est3 - p3).abs() < 3.0 * sigma3, "est {est3} exact {p3}");
    }

    #[test]
    fn monte_carlo_mean_time_converges_to_the_exact_mean() {
        let i = inst(4, &[0, 1], &[1, 2]);
        let exact = exact_ettr_sync_lsh2(&i).unwrap().to_f64();
        let cfg = SimulationConfig {
            setting: Setting::Sync,
            slots_budget: 60_000,
            experiments: 1,
            base_seed: 2718,
            ..SimulationConfig::default()
        };
        let stats = run_experiment(&i, HopAlgorithm::Lsh2, &cfg, 0).unwrap();
        let k = stats.ttrs().len() as f64;
        assert!(k > 10_000.0);
        // TTR is supported on [1, 4], so its standard deviation is below 1.5.
        let bound = 3.0 * 1.5 / k.sqrt();
        assert!(
            (stats.ettr() - exact).abs() < bound,
            "mc {} exact {exact}",
            stats.ettr()
        );
    }
}
