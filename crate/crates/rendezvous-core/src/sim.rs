//! Deterministic Monte Carlo engine for TTR/ETTR/MTTR measurement.
//!
//! Everything is a pure function of (configuration, seeds). Each experiment
//! derives its own seed from the base seed and the experiment index, and each
//! rendezvous attempt inside an experiment derives fresh shared and private
//! randomness from the experiment seed and the attempt index. Attempts are
//! therefore i.i.d. renewals, experiments are independent, and any execution
//! order (including parallel ones) reproduces identical numbers as long as
//! results are reduced in experiment-index order.

use alloc::vec::Vec;

use crate::channel::{ChannelId, ChannelSet, ProblemInstance, TtrSample};
use crate::hop::{
    lsh4_build_multiset, lsh4_hop, random_hop, synmac_hop, ChannelMultiset, HopAlgorithm,
};
use crate::instances::InstanceSpec;
use crate::rand::{derive_seed, Permutation, PrivateRandomness, SharedRandomness};
use crate::theory::{self, InstanceProfile};
use crate::Error;

/// Clock relationship between the two users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    /// Slot counters agree; both users evaluate slot t as t.
    Sync,
    /// User 2's clock leads user 1's by a per-experiment drift d: when user 1
    /// is in slot t, user 2 behaves as if in slot t + d.
    Async,
}

impl Setting {
    pub fn name(&self) -> &'static str {
        match self {
            Setting::Sync => "sync",
            Setting::Async => "async",
        }
    }
}

impl core::fmt::Display for Setting {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// How the per-experiment clock drift is chosen in the async setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftModel {
    /// The same drift for every experiment.
    Fixed(u32),
    /// Drift drawn uniformly from lo..=hi once per experiment.
    UniformRange { lo: u32, hi: u32 },
}

/// Knobs of a simulation run. Defaults mirror the full-scale setup this
/// engine was built to reproduce: 10,000 experiments of 10,000 slots each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub setting: Setting,
    pub drift: DriftModel,
    pub slots_budget: u32,
    pub experiments: u32,
    pub base_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            setting: Setting::Sync,
            drift: DriftModel::UniformRange { lo: 1, hi: 100 },
            slots_budget: 10_000,
            experiments: 10_000,
            base_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.slots_budget < 1 {
            return Err(Error::InvalidArgument("slot budget must be at least 1"));
        }
        if self.experiments < 1 {
            return Err(Error::InvalidArgument("experiment count must be at least 1"));
        }
        if let DriftModel::UniformRange { lo, hi } = self.drift {
            if lo > hi {
                return Err(Error::InvalidArgument("drift range must satisfy lo <= hi"));
            }
        }
        Ok(())
    }
}

/// Result of a single bounded rendezvous attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttemptOutcome {
    Rendezvous(TtrSample),
    /// The slot budget ran out first; the true TTR is unknown.
    Censored,
}

/// Everything one experiment measured.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStats {
    ttrs: Vec<TtrSample>,
    ettr: f64,
    mttr: u32,
    censored: u32,
}

impl ExperimentStats {
    fn from_samples(ttrs: Vec<TtrSample>, censored: u32) -> Self {
        let (ettr, mttr) = if ttrs.is_empty() {
            (f64::NAN, 0)
        } else {
            let sum: f64 = ttrs.iter().map(|s| f64::from(s.value())).sum();
            let max = ttrs.iter().map(|s| s.value()).max().unwrap_or(0);
            (sum / ttrs.len() as f64, max)
        };
        Self {
            ttrs,
            ettr,
            mttr,
            censored,
        }
    }

    pub fn ttrs(&self) -> &[TtrSample] {
        &self.ttrs
    }

    /// Mean completed TTR; NaN when every attempt was censored.
    pub fn ettr(&self) -> f64 {
        self.ettr
    }

    /// Largest completed TTR; 0 when every attempt was censored.
    pub fn mttr(&self) -> u32 {
        self.mttr
    }

    pub fn censored(&self) -> u32 {
        self.censored
    }

    pub fn all_censored(&self) -> bool {
        self.ttrs.is_empty()
    }
}

/// Channels keyed by their (injective) images, sorted so the cyclically
/// nearest image at or after an origin is one binary search away: the first
/// image >= origin wins, wrapping to the globally smallest image. For origins
/// and images in [0, N) this equals the argmin of (image - origin) mod N.
struct SortedImages {
    pairs: Vec<(u32, ChannelId)>,
}

impl SortedImages {
    fn from_set(c: &ChannelSet) -> Self {
        // Labels are already sorted and distinct.
        Self {
            pairs: c.channels().iter().map(|&ch| (ch.0, ch)).collect(),
        }
    }

    fn from_permuted(c: &ChannelSet, pi: &Permutation) -> Self {
        let mut pairs: Vec<(u32, ChannelId)> =
            c.channels().iter().map(|&ch| (pi.apply(ch.0), ch)).collect();
        pairs.sort_unstable_by_key(|&(img, _)| img);
        Self { pairs }
    }

    fn nearest_at_or_after(&self, origin: u32) -> ChannelId {
        let k = self.pairs.partition_point(|&(img, _)| img < origin);
        if k == self.pairs.len() {
            self.pairs[0].1
        } else {
            self.pairs[k].1
        }
    }
}

/// Per-attempt state: the shared permutations and per-user lookup structures
/// an algorithm needs, built once from this attempt's shared randomness.
enum PreparedAlg {
    Random,
    SynMac,
    Lsh {
        sorted: [SortedImages; 2],
    },
    Lsh2 {
        sorted: [SortedImages; 2],
        pi2: Permutation,
    },
    Lsh3 {
        sorted: [SortedImages; 2],
    },
    Lsh4 {
        multisets: [ChannelMultiset; 2],
        p: f64,
    },
}

impl PreparedAlg {
    fn prepare(
        inst: &ProblemInstance,
        alg: HopAlgorithm,
        shared: &SharedRandomness,
    ) -> Result<Self, Error> {
        let n = inst.n_total();
        Ok(match alg {
            HopAlgorithm::Random => PreparedAlg::Random,
            HopAlgorithm::SynMac => PreparedAlg::SynMac,
            HopAlgorithm::Lsh => PreparedAlg::Lsh {
                sorted: [
                    SortedImages::from_set(inst.c1()),
                    SortedImages::from_set(inst.c2()),
                ],
            },
            HopAlgorithm::Lsh2 => {
                let pi1 = shared.permutation("pi1", n)?;
                let pi2 = shared.permutation("pi2", n)?;
                PreparedAlg::Lsh2 {
                    sorted: [
                        SortedImages::from_permuted(inst.c1(), &pi1),
                        SortedImages::from_permuted(inst.c2(), &pi1),
                    ],
                    pi2,
                }
            }
            HopAlgorithm::Lsh3 => {
                let pi1 = shared.permutation("pi1", n)?;
                PreparedAlg::Lsh3 {
                    sorted: [
                        SortedImages::from_permuted(inst.c1(), &pi1),
                        SortedImages::from_permuted(inst.c2(), &pi1),
                    ],
                }
            }
            HopAlgorithm::Lsh4 { t0, p } => {
                let pi1 = shared.permutation("pi1", n)?;
                let pi2 = shared.permutation("pi2", n)?;
                PreparedAlg::Lsh4 {
                    multisets: [
                        lsh4_build_multiset(inst.c1(), &pi1, &pi2, t0)?,
                        lsh4_build_multiset(inst.c2(), &pi1, &pi2, t0)?,
                    ],
                    p,
                }
            }
        })
    }

    /// One user's hop in attempt slot `slot` (the draw index for private
    /// randomness), with that user's local clock reading `local_t`.
    #[allow(clippy::too_many_arguments)]
    fn hop(
        &self,
        user: usize,
        set: &ChannelSet,
        setting: Setting,
        slot: u32,
        local_t: u64,
        shared: &SharedRandomness,
        private: &PrivateRandomness,
    ) -> ChannelId {
        let n = set.n_total();
        let draw = u64::from(slot);
        match self {
            PreparedAlg::Random => random_hop(set, private, draw),
            PreparedAlg::SynMac => synmac_hop(set, local_t, private, draw),
            PreparedAlg::Lsh { sorted } => {
                sorted[user].nearest_at_or_after(shared.uniform(local_t, n))
            }
            PreparedAlg::Lsh2 { sorted, pi2 } => {
                let index = match setting {
                    // Synchronized two-permutation hopping provably meets
                    // within N slots, so the slot permutation never runs out.
                    Setting::Sync => {
                        assert!(local_t < u64::from(n), "sync rendezvous must occur within N slots");
                        local_t as u32
                    }
                    Setting::Async => (local_t % u64::from(n)) as u32,
                };
                sorted[user].nearest_at_or_after(pi2.apply(index))
            }
            PreparedAlg::Lsh3 { sorted } => {
                sorted[user].nearest_at_or_after(shared.uniform(local_t, n))
            }
            PreparedAlg::Lsh4 { multisets, p } => {
                lsh4_hop(set, &multisets[user], *p, private, draw)
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn attempt_bounded(
    inst: &ProblemInstance,
    alg: HopAlgorithm,
    setting: Setting,
    shared: &SharedRandomness,
    priv1: &PrivateRandomness,
    priv2: &PrivateRandomness,
    drift: u32,
    budget: u32,
) -> Result<AttemptOutcome, Error> {
    let prepared = PreparedAlg::prepare(inst, alg, shared)?;
    for t in 0..budget {
        let ch1 = prepared.hop(0, inst.c1(), setting, t, u64::from(t), shared, priv1);
        let local2 = u64::from(t) + u64::from(drift);
        let ch2 = prepared.hop(1, inst.c2(), setting, t, local2, shared, priv2);
        if ch1 == ch2 {
            return Ok(AttemptOutcome::Rendezvous(TtrSample::new(t + 1)));
        }
    }
    Ok(AttemptOutcome::Censored)
}

/// Run one rendezvous attempt from slot 0 under the full slot budget of
/// `cfg`. User 1 reads its clock as t, user 2 as t + drift; both consult the
/// same shared randomness, while picks and coins come from each user's
/// private stream.
pub fn run_attempt(
    inst: &ProblemInstance,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    shared: &SharedRandomness,
    priv1: &PrivateRandomness,
    priv2: &PrivateRandomness,
    drift: u32,
) -> Result<AttemptOutcome, Error> {
    cfg.validate()?;
    alg.validate()?;
    if cfg.setting == Setting::Sync && drift != 0 {
        return Err(Error::InvalidArgument("drift must be 0 in the sync setting"));
    }
    attempt_bounded(
        inst,
        alg,
        cfg.setting,
        shared,
        priv1,
        priv2,
        drift,
        cfg.slots_budget,
    )
}

fn draw_drift(cfg: &SimulationConfig, experiment_seed: u64) -> u32 {
    match cfg.setting {
        Setting::Sync => 0,
        Setting::Async => match cfg.drift {
            DriftModel::Fixed(d) => d,
            DriftModel::UniformRange { lo, hi } => {
                let rng = PrivateRandomness::new(derive_seed(experiment_seed, "drift", 0));
                lo + rng.pick(0, hi - lo + 1)
            }
        },
    }
}

fn experiment_on_instance(
    inst: &ProblemInstance,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    experiment_seed: u64,
    drift: u32,
) -> Result<ExperimentStats, Error> {
    let budget = cfg.slots_budget;
    let mut ttrs = Vec::new();
    let mut censored = 0u32;
    let mut used = 0u32;
    let mut attempt = 0u64;
    while used < budget {
        let shared = SharedRandomness::new(derive_seed(experiment_seed, "shared", attempt));
        let priv1 = PrivateRandomness::new(derive_seed(experiment_seed, "user1", attempt));
        let priv2 = PrivateRandomness::new(derive_seed(experiment_seed, "user2", attempt));
        let outcome = attempt_bounded(
            inst,
            alg,
            cfg.setting,
            &shared,
            &priv1,
            &priv2,
            drift,
            budget - used,
        )?;
        match outcome {
            AttemptOutcome::Rendezvous(sample) => {
                used += sample.value();
                ttrs.push(sample);
            }
            AttemptOutcome::Censored => {
                censored += 1;
                used = budget;
            }
        }
        attempt += 1;
    }
    Ok(ExperimentStats::from_samples(ttrs, censored))
}

/// Run one experiment on a fixed instance: renewal attempts under a
/// cumulative slot budget, each attempt with fresh shared and private
/// randomness, the final budget-capped attempt counted as censored.
pub fn run_experiment(
    inst: &ProblemInstance,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    experiment_index: u64,
) -> Result<ExperimentStats, Error> {
    cfg.validate()?;
    alg.validate()?;
    let seed = derive_seed(cfg.base_seed, "experiment", experiment_index);
    let drift = draw_drift(cfg, seed);
    experiment_on_instance(inst, alg, cfg, seed, drift)
}

/// Run one experiment on a freshly generated instance of `spec`; generation
/// randomness is derived from the same experiment seed, so every experiment
/// sees its own placement.
pub fn run_experiment_spec(
    spec: &InstanceSpec,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    experiment_index: u64,
) -> Result<ExperimentStats, Error> {
    cfg.validate()?;
    alg.validate()?;
    let seed = derive_seed(cfg.base_seed, "experiment", experiment_index);
    let rng = PrivateRandomness::new(derive_seed(seed, "generate", 0));
    let inst = spec.generate(&rng)?;
    let drift = draw_drift(cfg, seed);
    experiment_on_instance(&inst, alg, cfg, seed, drift)
}

/// The reduction-friendly residue of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentSummary {
    /// Mean completed TTR; NaN when all attempts were censored.
    pub ettr: f64,
    /// Max completed TTR; 0 when all attempts were censored.
    pub mttr: u32,
    /// Number of completed attempts.
    pub completed: u32,
    /// Number of censored attempts.
    pub censored: u32,
}

/// Collapse full stats to the summary the aggregators consume.
pub fn summarize(stats: &ExperimentStats) -> ExperimentSummary {
    ExperimentSummary {
        ettr: stats.ettr(),
        mttr: stats.mttr(),
        completed: stats.ttrs().len() as u32,
        censored: stats.censored(),
    }
}

/// One experiment of a sweep cell, straight to its summary. Pure in
/// (spec, alg, cfg, index); sweep aggregation is reduction of these in
/// index order, no matter what schedule computed them.
pub fn experiment_summary(
    spec: &InstanceSpec,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    experiment_index: u64,
) -> Result<ExperimentSummary, Error> {
    run_experiment_spec(spec, alg, cfg, experiment_index).map(|s| summarize(&s))
}

/// One aggregated line of a sweep: a (setting, algorithm, size profile) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub setting: Setting,
    pub algorithm: HopAlgorithm,
    pub n_total: u32,
    pub n1: u32,
    pub n2: u32,
    pub n12: u32,
    pub jaccard: f64,
    pub experiments: u32,
    pub slots: u32,
    /// Mean of per-experiment ETTRs over experiments with at least one
    /// completed attempt; NaN if there were none.
    pub ettr_mean: f64,
    /// Half-width of the normal 95% interval for ettr_mean; NaN below two
    /// contributing experiments.
    pub ettr_ci95: f64,
    /// Mean of per-experiment max TTRs, same contributing experiments.
    pub mttr_mean: f64,
    /// Largest completed TTR anywhere in the cell.
    pub mttr_max: u32,
    /// Total censored attempts across all experiments.
    pub censored: u64,
    /// Closed-form reference ETTR for this algorithm, NaN when none exists.
    pub theory_ettr: f64,
}

/// Closed-form reference ETTR for an algorithm on a size profile: the
/// geometric mean time for random hopping, the matching-limit 1/J for the
/// hash family, the interleaving approximations for the permuted-hash and
/// mixed rules, and NaN for the schedule baseline, which has no closed form
/// here.
pub fn theory_ettr_for(alg: HopAlgorithm, profile: &InstanceProfile) -> f64 {
    match alg {
        HopAlgorithm::Random => theory::random_ettr(profile),
        HopAlgorithm::SynMac => f64::NAN,
        HopAlgorithm::Lsh | HopAlgorithm::Lsh2 => theory::lsh2_limit_ettr(profile),
        HopAlgorithm::Lsh3 => theory::lsh3_ettr_approx(profile),
        HopAlgorithm::Lsh4 { t0, p } => {
            theory::lsh4_ettr_approx(profile, t0, p).unwrap_or(f64::NAN)
        }
    }
}

/// Reduce per-experiment summaries (in experiment-index order) to a sweep
/// row. Experiments whose every attempt was censored contribute only to the
/// censored tally.
pub fn aggregate_row(
    spec: &InstanceSpec,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    summaries: &[ExperimentSummary],
) -> SweepRow {
    let mut censored = 0u64;
    let mut completed = 0u64;
    let mut sum_ettr = 0.0;
    let mut sum_mttr = 0.0;
    let mut mttr_max = 0u32;
    for s in summaries {
        censored += u64::from(s.censored);
        if s.completed > 0 {
            completed += 1;
            sum_ettr += s.ettr;
            sum_mttr += f64::from(s.mttr);
            mttr_max = mttr_max.max(s.mttr);
        }
    }
    let k = completed as f64;
    let (ettr_mean, mttr_mean) = if completed > 0 {
        (sum_ettr / k, sum_mttr / k)
    } else {
        (f64::NAN, f64::NAN)
    };
    let ettr_ci95 = if completed > 1 {
        let mut ss = 0.0;
        for s in summaries {
            if s.completed > 0 {
                let d = s.ettr - ettr_mean;
                ss += d * d;
            }
        }
        let sd = libm::sqrt(ss / (k - 1.0));
        1.96 * sd / libm::sqrt(k)
    } else {
        f64::NAN
    };
    let profile = InstanceProfile::new(spec.n1, spec.n2, spec.n12)
        .expect("validated spec sizes form a profile");
    SweepRow {
        setting: cfg.setting,
        algorithm: alg,
        n_total: spec.n_total,
        n1: spec.n1,
        n2: spec.n2,
        n12: spec.n12,
        jaccard: theory::jaccard(&profile),
        experiments: cfg.experiments,
        slots: cfg.slots_budget,
        ettr_mean,
        ettr_ci95,
        mttr_mean,
        mttr_max,
        censored,
        theory_ettr: theory_ettr_for(alg, &profile),
    }
}

/// All rows of a sweep, algorithms outer, specs inner.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Run the full grid sequentially: for every algorithm and spec, run
/// cfg.experiments independent experiments (fresh instance each) and reduce
/// them in index order.
pub fn run_sweep(
    specs: &[InstanceSpec],
    algs: &[HopAlgorithm],
    cfg: &SimulationConfig,
) -> Result<SweepResult, Error> {
    cfg.validate()?;
    for spec in specs {
        spec.validate()?;
    }
    for alg in algs {
        alg.validate()?;
    }
    let mut rows = Vec::with_capacity(specs.len() * algs.len());
    for &alg in algs {
        for spec in specs {
            let mut summaries = Vec::with_capacity(cfg.experiments as usize);
            for e in 0..u64::from(cfg.experiments) {
                summaries.push(experiment_summary(spec, alg, cfg, e)?);
            }
            rows.push(aggregate_row(spec, alg, cfg, &summaries));
        }
    }
    Ok(SweepResult { rows })
}

/// Estimate the single-slot rendezvous probability at t = 0: independent
/// trials, each with fresh shared randomness and (in the async setting) a
/// fresh drift, counting the fraction of immediate collisions.
pub fn estimate_prob(
    inst: &ProblemInstance,
    alg: HopAlgorithm,
    cfg: &SimulationConfig,
    samples: u64,
) -> Result<f64, Error> {
    cfg.validate()?;
    alg.validate()?;
    if samples < 1 {
        return Err(Error::InvalidArgument("sample count must be at least 1"));
    }
    let mut hits = 0u64;
    for trial in 0..samples {
        let seed = derive_seed(cfg.base_seed, "trial", trial);
        let shared = SharedRandomness::new(derive_seed(seed, "shared", 0));
        let priv1 = PrivateRandomness::new(derive_seed(seed, "user1", 0));
        let priv2 = PrivateRandomness::new(derive_seed(seed, "user2", 0));
        let drift = draw_drift(cfg, seed);
        let prepared = PreparedAlg::prepare(inst, alg, &shared)?;
        let ch1 = prepared.hop(0, inst.c1(), cfg.setting, 0, 0, &shared, &priv1);
        let ch2 = prepared.hop(1, inst.c2(), cfg.setting, 0, u64::from(drift), &shared, &priv2);
        if ch1 == ch2 {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::Layout;

    fn inst(n: u32, l1: &[u32], l2: &[u32]) -> ProblemInstance {
        ProblemInstance::new(
            ChannelSet::new(n, l1.to_vec()).unwrap(),
            ChannelSet::new(n, l2.to_vec()).unwrap(),
        )
        .unwrap()
    }

    fn all_algorithms() -> [HopAlgorithm; 6] {
        [
            HopAlgorithm::Random,
            HopAlgorithm::SynMac,
            HopAlgorithm::Lsh,
            HopAlgorithm::Lsh2,
            HopAlgorithm::Lsh3,
            HopAlgorithm::Lsh4 { t0: 1, p: 0.5 },
        ]
    }

    fn cfg(setting: Setting, budget: u32, experiments: u32, seed: u64) -> SimulationConfig {
        SimulationConfig {
            setting,
            drift: DriftModel::UniformRange { lo: 1, hi: 100 },
            slots_budget: budget,
            experiments,
            base_seed: seed,
        }
    }

    fn handles(seed: u64) -> (SharedRandomness, PrivateRandomness, PrivateRandomness) {
        (
            SharedRandomness::new(derive_seed(seed, "shared", 0)),
            PrivateRandomness::new(derive_seed(seed, "user1", 0)),
            PrivateRandomness::new(derive_seed(seed, "user2", 0)),
        )
    }

    #[test]
    fn singleton_instance_meets_in_the_first_slot_under_every_rule() {
        let inst = inst(2, &[0], &[0]);
        let c = cfg(Setting::Sync, 100, 1, 3);
        for alg in all_algorithms() {
            let (shared, p1, p2) = handles(9);
            let out = run_attempt(&inst, alg, &c, &shared, &p1, &p2, 0).unwrap();
            assert_eq!(
                out,
                AttemptOutcome::Rendezvous(TtrSample::new(1)),
                "alg {alg}"
            );
        }
    }

    #[test]
    fn budget_splits_into_unit_attempts_when_every_attempt_meets_at_once() {
        let inst = inst(2, &[0], &[0]);
        let c = cfg(Setting::Sync, 10, 1, 3);
        let stats = run_experiment(&inst, HopAlgorithm::Random, &c, 0).unwrap();
        assert_eq!(stats.ttrs().len(), 10);
        assert_eq!(stats.ettr(), 1.0);
        assert_eq!(stats.mttr(), 1);
        assert_eq!(stats.censored(), 0);
        assert!(!stats.all_censored());
    }

    #[test]
    fn experiments_replay_bit_for_bit() {
        let inst = inst(16, &[0, 2, 5, 9], &[2, 3, 9, 11]);
        let c = cfg(Setting::Async, 500, 1, 42);
        for alg in all_algorithms() {
            let a = run_experiment(&inst, alg, &c, 7).unwrap();
            let b = run_experiment(&inst, alg, &c, 7).unwrap();
            assert_eq!(a, b, "alg {alg}");
        }
    }

    #[test]
    fn two_permutation_rule_never_exceeds_n_in_sync() {
        let spec = InstanceSpec {
            n_total: 64,
            n1: 15,
            n2: 15,
            n12: 5,
            layout: Layout::Uniform,
        };
        let c = cfg(Setting::Sync, 10_000, 1, 11);
        for e in 0..50 {
            let stats = run_experiment_spec(&spec, HopAlgorithm::Lsh2, &c, e).unwrap();
            assert!(!stats.all_censored());
            assert!(stats.mttr() <= 64);
        }
    }

    #[test]
    fn async_with_zero_drift_reproduces_sync_attempts() {
        let inst = inst(16, &[1, 4, 7, 8, 13], &[4, 5, 8, 9]);
        let sync = cfg(Setting::Sync, 400, 1, 5);
        let mut zero_drift = sync;
        zero_drift.setting = Setting::Async;
        zero_drift.drift = DriftModel::Fixed(0);
        for alg in all_algorithms() {
            for seed in 0..20u64 {
                let (shared, p1, p2) = handles(seed);
                let a = run_attempt(&inst, alg, &sync, &shared, &p1, &p2, 0).unwrap();
                let b = run_attempt(&inst, alg, &zero_drift, &shared, &p1, &p2, 0).unwrap();
                assert_eq!(a, b, "alg {alg} seed {seed}");
            }
        }
    }

    #[test]
    fn swapping_users_preserves_the_sync_rendezvous_slot() {
        let a = inst(20, &[0, 3, 7, 11, 15], &[3, 4, 11, 18]);
        let b = inst(20, &[3, 4, 11, 18], &[0, 3, 7, 11, 15]);
        let c = cfg(Setting::Sync, 600, 1, 23);
        for alg in all_algorithms() {
            for seed in 0..20u64 {
                let (shared, p1, p2) = handles(seed);
                let out_ab = run_attempt(&a, alg, &c, &shared, &p1, &p2, 0).unwrap();
                let out_ba = run_attempt(&b, alg, &c, &shared, &p2, &p1, 0).unwrap();
                assert_eq!(out_ab, out_ba, "alg {alg} seed {seed}");
            }
        }
    }

    #[test]
    fn random_rule_matches_the_geometric_mean_time() {
        // n1 n2 / n12 = 15 * 15 / 5 = 45; one long experiment yields about
        // 1e5 completed attempts, so a 2% relative window is over 6 sigma.
        let spec = InstanceSpec {
            n_total: 64,
            n1: 15,
            n2: 15,
            n12: 5,
            layout: Layout::Uniform,
        };
        let c = cfg(Setting::Sync, 4_500_000, 1, 1234);
        let stats = run_experiment_spec(&spec, HopAlgorithm::Random, &c, 0).unwrap();
        assert!(stats.ttrs().len() > 50_000);
        let rel = (stats.ettr() - 45.0).abs() / 45.0;
        assert!(rel < 0.02, "ettr {} rel {}", stats.ettr(), rel);
    }

    #[test]
    fn no_sample_exceeds_the_budget_and_censoring_is_counted() {
        let spec = InstanceSpec {
            n_total: 64,
            n1: 8,
            n2: 8,
            n12: 1,
            layout: Layout::Uniform,
        };
        // ETTR is 64, so a budget of 2 censors nearly every experiment.
        let c = cfg(Setting::Sync, 2, 200, 77);
        let mut censored_total = 0u64;
        let mut all_censored_seen = false;
        for e in 0..200 {
            let stats = run_experiment_spec(&spec, HopAlgorithm::Random, &c, e).unwrap();
            for s in stats.ttrs() {
                assert!(s.value() <= 2);
            }
            censored_total += u64::from(stats.censored());
            all_censored_seen |= stats.all_censored();
            if stats.all_censored() {
                assert!(stats.ettr().is_nan());
                assert_eq!(stats.mttr(), 0);
            }
        }
        assert!(censored_total > 100);
        assert!(all_censored_seen);
    }

    #[test]
    fn sync_setting_rejects_nonzero_drift() {
        let i = inst(8, &[0, 1], &[1, 2]);
        let c = cfg(Setting::Sync, 10, 1, 0);
        let (shared, p1, p2) = handles(0);
        let err = run_attempt(&i, HopAlgorithm::Random, &c, &shared, &p1, &p2, 3);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn oversized_multiset_length_is_rejected() {
        let i = inst(8, &[0, 1], &[1, 2]);
        let c = cfg(Setting::Sync, 10, 1, 0);
        let (shared, p1, p2) = handles(0);
        let alg = HopAlgorithm::Lsh4 { t0: 9, p: 0.5 };
        let err = run_attempt(&i, alg, &c, &shared, &p1, &p2, 0);
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn single_experiment_sweep_row_equals_the_experiment_it_wraps() {
        let spec = InstanceSpec {
            n_total: 32,
            n1: 8,
            n2: 8,
            n12: 4,
            layout: Layout::Uniform,
        };
        let c = cfg(Setting::Sync, 2000, 1, 99);
        let result = run_sweep(&[spec], &[HopAlgorithm::Lsh2], &c).unwrap();
        assert_eq!(result.rows.len(), 1);
        let row = &result.rows[0];
        let stats = run_experiment_spec(&spec, HopAlgorithm::Lsh2, &c, 0).unwrap();
        assert_eq!(row.ettr_mean, stats.ettr());
        assert_eq!(row.mttr_mean, f64::from(stats.mttr()));
        assert_eq!(row.mttr_max, stats.mttr());
        assert!(row.ettr_ci95.is_nan());
        assert!((row.jaccard - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_come_out_algorithm_major() {
        let specs = [
            InstanceSpec {
                n_total: 16,
                n1: 4,
                n2: 4,
                n12: 2,
                layout: Layout::Uniform,
            },
            InstanceSpec {
                n_total: 16,
                n1: 4,
                n2: 4,
                n12: 4,
                layout: Layout::Uniform,
            },
        ];
        let algs = [HopAlgorithm::Random, HopAlgorithm::Lsh2];
        let c = cfg(Setting::Sync, 100, 3, 5);
        let result = run_sweep(&specs, &algs, &c).unwrap();
        let keys: Vec<(&str, u32)> = result
            .rows
            .iter()
            .map(|r| (r.algorithm.name(), r.n12))
            .collect();
        assert_eq!(
            keys,
            [("random", 2), ("random", 4), ("lsh2", 2), ("lsh2", 4)]
        );
    }

    #[test]
    fn mean_rendezvous_time_decreases_with_overlap() {
        let c = cfg(Setting::Sync, 2000, 300, 321);
        let specs: Vec<InstanceSpec> = [2u32, 4, 8]
            .iter()
            .map(|&n12| InstanceSpec {
                n_total: 32,
                n1: 8,
                n2: 8,
                n12,
                layout: Layout::Uniform,
            })
            .collect();
        for alg in [HopAlgorithm::Random, HopAlgorithm::Lsh2] {
            let rows = run_sweep(&specs, &[alg], &c).unwrap().rows;
            for pair in rows.windows(2) {
                // Doubling the overlap here at least halves the mean, so the
                // gap dwarfs a 3 sigma noise band.
                let noise = 3.0 * (pair[0].ettr_ci95 + pair[1].ettr_ci95) / 1.96;
                assert!(
                    pair[0].ettr_mean - pair[1].ettr_mean > noise,
                    "alg {alg}: {} then {}",
                    pair[0].ettr_mean,
                    pair[1].ettr_mean
                );
            }
        }
    }

    #[test]
    fn single_slot_probability_of_the_two_permutation_rule_is_the_overlap_ratio() {
        let i = inst(16, &[0, 1, 2, 3, 4, 5], &[4, 5, 6, 7]);
        let j = i.jaccard();
        let c = cfg(Setting::Sync, 1, 1, 2024);
        let samples = 40_000u64;
        let p = estimate_prob(&i, HopAlgorithm::Lsh2, &c, samples).unwrap();
        let sigma = (j * (1.0 - j) / samples as f64).sqrt();
        assert!((p - j).abs() < 3.0 * sigma, "p {p} vs J {j}");
    }

    #[test]
    fn single_slot_probability_of_the_random_rule_is_the_product_law() {
        let i = inst(16, &[0, 1, 2, 3, 4, 5], &[4, 5, 6, 7]);
        let expect = f64::from(i.n12()) / (6.0 * 4.0);
        let c = cfg(Setting::Sync, 1, 1, 6);
        let samples = 40_000u64;
        let p = estimate_prob(&i, HopAlgorithm::Random, &c, samples).unwrap();
        let sigma = (expect * (1.0 - expect) / samples as f64).sqrt();
        assert!((p - expect).abs() < 3.0 * sigma, "p {p} vs {expect}");
    }

    #[test]
    fn config_validation_rejects_degenerate_budgets_and_ranges() {
        let mut c = SimulationConfig::default();
        assert!(c.validate().is_ok());
        c.slots_budget = 0;
        assert!(c.validate().is_err());
        c.slots_budget = 1;
        c.experiments = 0;
        assert!(c.validate().is_err());
        c.experiments = 1;
        c.drift = DriftModel::UniformRange { lo: 5, hi: 2 };
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_config_is_the_full_scale_preset() {
        let c = SimulationConfig::default();
        assert_eq!(c.slots_budget, 10_000);
        assert_eq!(c.experiments, 10_000);
        assert_eq!(c.setting, Setting::Sync);
        assert_eq!(c.drift, DriftModel::UniformRange { lo: 1, hi: 100 });
    }
}
