//! Plan execution: string<->type bridges, the parallel sweep, and the
//! exact-check report.
//!
//! Every executor consumes a resolved plan (the thing a manifest stores) and
//! produces output bytes, so a replayed manifest goes through exactly the
//! code path of the original run.

use rayon::prelude::*;
use rendezvous_core::oracle::{exact_ettr_sync_lsh2, exact_prob_lsh2, exact_prob_lsh3, ExactProb};
use rendezvous_core::sim::{
    aggregate_row, estimate_prob, experiment_summary, run_experiment, DriftModel, Setting,
    SimulationConfig, SweepResult,
};
use rendezvous_core::theory::{self, InstanceProfile};
use rendezvous_core::{
    ChannelSet, Error, HopAlgorithm, InstanceSpec, Layout, ProblemInstance,
};

use crate::formats;
use crate::manifest::{OraclePlan, Plan, SimPlan, TheoryPlan};

// Enumeration limits of the exact probability checks, mirroring the oracles.
const LSH2_ORACLE_MAX_N: u32 = 8;
const LSH3_ORACLE_MAX_N: u32 = 7;
const ETTR_ORACLE_MAX_N: u32 = 6;

pub fn parse_setting(s: &str) -> Result<Setting, Error> {
    match s {
        "sync" => Ok(Setting::Sync),
        "async" => Ok(Setting::Async),
        _ => Err(Error::InvalidArgument("setting must be sync or async")),
    }
}

pub fn parse_layout(s: &str) -> Result<Layout, Error> {
    match s {
        "uniform" => Ok(Layout::Uniform),
        "contiguous" => Ok(Layout::Contiguous),
        _ => Err(Error::InvalidArgument(
            "layout must be uniform or contiguous",
        )),
    }
}

/// Drift syntax: `fixed:D` or `uniform:LO:HI` (inclusive bounds).
pub fn parse_drift(s: &str) -> Result<DriftModel, Error> {
    const MSG: &str = "drift must be fixed:D or uniform:LO:HI";
    let mut parts = s.split(':');
    let model = match (parts.next(), parts.next(), parts.next(), parts.next()) {
        (Some("fixed"), Some(d), None, None) => DriftModel::Fixed(
            d.parse::<u32>().map_err(|_| Error::InvalidArgument(MSG))?,
        ),
        (Some("uniform"), Some(lo), Some(hi), None) => DriftModel::UniformRange {
            lo: lo.parse::<u32>().map_err(|_| Error::InvalidArgument(MSG))?,
            hi: hi.parse::<u32>().map_err(|_| Error::InvalidArgument(MSG))?,
        },
        _ => return Err(Error::InvalidArgument(MSG)),
    };
    Ok(model)
}

pub fn drift_to_string(d: &DriftModel) -> String {
    match d {
        DriftModel::Fixed(v) => format!("fixed:{v}"),
        DriftModel::UniformRange { lo, hi } => format!("uniform:{lo}:{hi}"),
    }
}

/// Resolves an algorithm name; the multiset rule takes its parameters from
/// the surrounding plan.
pub fn parse_algorithm(name: &str, t0: u32, p: f64) -> Result<HopAlgorithm, Error> {
    match name {
        "random" => Ok(HopAlgorithm::Random),
        "synmac" => Ok(HopAlgorithm::SynMac),
        "lsh" => Ok(HopAlgorithm::Lsh),
        "lsh2" => Ok(HopAlgorithm::Lsh2),
        "lsh3" => Ok(HopAlgorithm::Lsh3),
        "lsh4" => Ok(HopAlgorithm::Lsh4 { t0, p }),
        _ => Err(Error::InvalidArgument(
            "algorithm must be one of random, synmac, lsh, lsh2, lsh3, lsh4",
        )),
    }
}

pub fn parse_algorithm_list(list: &[String], t0: u32, p: f64) -> Result<Vec<HopAlgorithm>, Error> {
    if list.is_empty() {
        return Err(Error::InvalidArgument("algorithm list must be nonempty"));
    }
    list.iter().map(|s| parse_algorithm(s, t0, p)).collect()
}

/// Sweep syntax: `lo:hi` or `lo:hi:step`, inclusive on both ends. An empty
/// range (lo > hi) is a valid, empty grid.
pub fn parse_sweep(s: &str) -> Result<Vec<u32>, Error> {
    const MSG: &str = "sweep must be lo:hi or lo:hi:step";
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() < 2 || parts.len() > 3 {
        return Err(Error::InvalidArgument(MSG));
    }
    let field = |i: usize| -> Result<u32, Error> {
        parts[i].parse::<u32>().map_err(|_| Error::InvalidArgument(MSG))
    };
    let lo = field(0)?;
    let hi = field(1)?;
    let step = if parts.len() == 3 { field(2)? } else { 1 };
    if step < 1 {
        return Err(Error::InvalidArgument("sweep step must be at least 1"));
    }
    let mut values = Vec::new();
    let mut v = lo;
    while v <= hi {
        values.push(v);
        match v.checked_add(step) {
            Some(next) => v = next,
            None => break,
        }
    }
    Ok(values)
}

/// The sweep grid on a worker pool. Each experiment is pure in its index, so
/// collecting the per-index summaries in order and reducing them with the
/// same fold as the sequential path yields byte-identical rows for any
/// thread count (0 picks the core count).
pub fn run_sweep_parallel(
    specs: &[InstanceSpec],
    algs: &[HopAlgorithm],
    cfg: &SimulationConfig,
    threads: usize,
) -> Result<SweepResult, Error> {
    cfg.validate()?;
    for spec in specs {
        spec.validate()?;
    }
    for alg in algs {
        alg.validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|_| Error::InvalidArgument("worker pool construction failed"))?;
    pool.install(|| {
        let mut rows = Vec::with_capacity(specs.len() * algs.len());
        for &alg in algs {
            for spec in specs {
                let summaries = (0..u64::from(cfg.experiments))
                    .into_par_iter()
                    .map(|e| experiment_summary(spec, alg, cfg, e))
                    .collect::<Result<Vec<_>, Error>>()?;
                rows.push(aggregate_row(spec, alg, cfg, &summaries));
            }
        }
        Ok(SweepResult { rows })
    })
}

fn render_format(format: &str, csv: String, json: String) -> Result<String, Error> {
    match format {
        "csv" => Ok(csv),
        "json" => Ok(json),
        _ => Err(Error::InvalidArgument("format must be csv or json")),
    }
}

pub fn execute_sim(plan: &SimPlan) -> Result<String, Error> {
    let setting = parse_setting(&plan.setting)?;
    let layout = parse_layout(&plan.layout)?;
    let drift = parse_drift(&plan.drift)?;
    let algs = parse_algorithm_list(&plan.algorithms, plan.t0, plan.p)?;
    let specs: Vec<InstanceSpec> = plan
        .n12_values
        .iter()
        .map(|&n12| InstanceSpec {
            n_total: plan.n_total,
            n1: plan.n1,
            n2: plan.n2,
            n12,
            layout,
        })
        .collect();
    let cfg = SimulationConfig {
        setting,
        drift,
        slots_budget: plan.slots,
        experiments: plan.experiments,
        base_seed: plan.seed,
    };
    let result = run_sweep_parallel(&specs, &algs, &cfg, plan.threads)?;
    render_format(
        &plan.format,
        formats::sim_csv(&result.rows),
        formats::sim_json(&result.rows),
    )
}

pub fn execute_theory(plan: &TheoryPlan) -> Result<String, Error> {
    let mut rows = Vec::with_capacity(plan.n12_values.len());
    for &n12 in &plan.n12_values {
        let profile = InstanceProfile::new(plan.n1, plan.n2, n12)?;
        rows.push(formats::TheoryRow::compute(&profile, plan.t0, plan.p)?);
    }
    render_format(
        &plan.format,
        formats::theory_csv(&rows),
        formats::theory_json(&rows),
    )
}

/// Exact-check report plus its overall verdict.
#[derive(Debug)]
pub struct OracleReport {
    pub text: String,
    /// True when every executed check printed PASS.
    pub passed: bool,
}

fn pass_token(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn set_braces(c: &ChannelSet) -> String {
    let labels: Vec<String> = c.channels().iter().map(|ch| ch.0.to_string()).collect();
    format!("{{{}}}", labels.join(","))
}

fn jaccard_exact(inst: &ProblemInstance) -> ExactProb {
    let u = inst.n1() + inst.n2() - inst.n12();
    ExactProb::from_ints(u64::from(inst.n12()), u64::from(u)).expect("union is positive")
}

/// Binomial three-sigma band around an exact probability.
fn binomial_tol(p: f64, samples: u64) -> f64 {
    3.0 * (p * (1.0 - p) / samples as f64).sqrt()
}

fn check_lsh2(inst: &ProblemInstance, plan: &OraclePlan, out: &mut String) -> Result<bool, Error> {
    let exact = exact_prob_lsh2(inst)?;
    let jac = jaccard_exact(inst);
    let matches = exact.as_ratio() == jac.as_ratio();
    out.push_str(&format!(
        "lsh2 exact={exact} jaccard={jac} {}\n",
        pass_token(matches)
    ));

    let cfg = SimulationConfig {
        setting: Setting::Sync,
        slots_budget: 1,
        experiments: 1,
        base_seed: plan.seed,
        ..SimulationConfig::default()
    };
    let mc = estimate_prob(inst, HopAlgorithm::Lsh2, &cfg, plan.samples)?;
    let p = exact.to_f64();
    let tol = binomial_tol(p, plan.samples);
    let close = (mc - p).abs() <= tol;
    out.push_str(&format!(
        "lsh2 mc={} exact={} tol={} {}\n",
        formats::fmt_float(mc, 6),
        formats::fmt_float(p, 6),
        formats::fmt_float(tol, 6),
        pass_token(close)
    ));
    Ok(matches && close)
}

fn check_lsh3(inst: &ProblemInstance, plan: &OraclePlan, out: &mut String) -> Result<bool, Error> {
    let exact = exact_prob_lsh3(inst, true)?;
    let approx = theory::lsh3_prob_approx(&inst.profile());
    let cfg = SimulationConfig {
        setting: Setting::Async,
        slots_budget: 1,
        experiments: 1,
        base_seed: plan.seed,
        ..SimulationConfig::default()
    };
    let mc = estimate_prob(inst, HopAlgorithm::Lsh3, &cfg, plan.samples)?;
    let p = exact.to_f64();
    let tol = binomial_tol(p, plan.samples);
    let close = (mc - p).abs() <= tol;
    out.push_str(&format!(
        "lsh3 exact={exact} float={} approx={} mc={} tol={} {}\n",
        formats::fmt_float(p, 6),
        formats::fmt_float(approx, 6),
        formats::fmt_float(mc, 6),
        formats::fmt_float(tol, 6),
        pass_token(close)
    ));
    Ok(close)
}

fn check_ettr(inst: &ProblemInstance, plan: &OraclePlan, out: &mut String) -> Result<bool, Error> {
    let exact = exact_ettr_sync_lsh2(inst)?;
    let e = exact.to_f64();
    let n = f64::from(inst.n_total());
    let in_range = (1.0..=n).contains(&e);

    let budget = plan.samples.clamp(1, u64::from(u32::MAX)) as u32;
    let cfg = SimulationConfig {
        setting: Setting::Sync,
        slots_budget: budget,
        experiments: 1,
        base_seed: plan.seed,
        ..SimulationConfig::default()
    };
    let stats = run_experiment(inst, HopAlgorithm::Lsh2, &cfg, 0)?;
    let k = stats.ttrs().len() as f64;
    // TTR is supported on [1, N] here, so N/2 over-covers its deviation.
    let tol = 3.0 * (n / 2.0) / k.max(1.0).sqrt();
    let close = k > 0.0 && (stats.ettr() - e).abs() <= tol;
    out.push_str(&format!(
        "ettr exact={exact} float={} mc={} tol={} {}\n",
        formats::fmt_float(e, 6),
        formats::fmt_float(stats.ettr(), 6),
        formats::fmt_float(tol, 6),
        pass_token(in_range && close)
    ));
    Ok(in_range && close)
}

pub fn execute_oracle(plan: &OraclePlan) -> Result<OracleReport, Error> {
    let inst = ProblemInstance::new(
        ChannelSet::new(plan.n_total, plan.c1.clone())?,
        ChannelSet::new(plan.n_total, plan.c2.clone())?,
    )?;
    if plan.samples < 1 {
        return Err(Error::InvalidArgument("sample count must be at least 1"));
    }
    let n = inst.n_total();
    let mut text = format!(
        "instance N={} c1={} c2={} n12={} jaccard={}\n",
        n,
        set_braces(inst.c1()),
        set_braces(inst.c2()),
        inst.n12(),
        jaccard_exact(&inst)
    );

    let mut passed = true;
    match plan.check.as_str() {
        "lsh2" => passed &= check_lsh2(&inst, plan, &mut text)?,
        "lsh3" => passed &= check_lsh3(&inst, plan, &mut text)?,
        "ettr" => passed &= check_ettr(&inst, plan, &mut text)?,
        "all" => {
            if n > LSH2_ORACLE_MAX_N {
                // Nothing fits; surface the widest guard.
                return Err(Error::GuardViolation {
                    n_total: n,
                    max_supported: LSH2_ORACLE_MAX_N,
                });
            }
            passed &= check_lsh2(&inst, plan, &mut text)?;
            if n <= LSH3_ORACLE_MAX_N {
                passed &= check_lsh3(&inst, plan, &mut text)?;
            } else {
                text.push_str(&format!(
                    "lsh3 skipped (N={n} exceeds oracle guard {LSH3_ORACLE_MAX_N})\n"
                ));
            }
            if n <= ETTR_ORACLE_MAX_N {
                passed &= check_ettr(&inst, plan, &mut text)?;
            } else {
                text.push_str(&format!(
                    "ettr skipped (N={n} exceeds oracle guard {ETTR_ORACLE_MAX_N})\n"
                ));
            }
        }
        _ => {
            return Err(Error::InvalidArgument(
                "check must be one of all, lsh2, lsh3, ettr",
            ))
        }
    }
    Ok(OracleReport { text, passed })
}

/// Output of an executed plan, ready to write.
pub enum PlanOutput {
    Table(String),
    Report(OracleReport),
}

impl PlanOutput {
    pub fn text(&self) -> &str {
        match self {
            PlanOutput::Table(t) => t,
            PlanOutput::Report(r) => &r.text,
        }
    }

    /// Process exit code the output calls for.
    pub fn exit_code(&self) -> u8 {
        match self {
            PlanOutput::Table(_) => 0,
            PlanOutput::Report(r) => {
                if r.passed {
                    0
                } else {
                    1
                }
            }
        }
    }
}

pub fn execute_plan(plan: &Plan) -> Result<PlanOutput, Error> {
    match plan {
        Plan::Sim(p) => execute_sim(p).map(PlanOutput::Table),
        Plan::Theory(p) => execute_theory(p).map(PlanOutput::Table),
        Plan::Oracle(p) => execute_oracle(p).map(PlanOutput::Report),
    }
}
