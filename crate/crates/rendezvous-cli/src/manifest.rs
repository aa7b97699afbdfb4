//! Run manifests: a JSON record of everything that determined a run's output.
//!
//! A manifest holds the resolved plan (defaults filled in, seed pinned), so
//! `replay` can re-execute it and produce byte-identical output on any
//! machine and any thread count. Timing is recorded for humans and ignored
//! by replay.

use serde::{Deserialize, Serialize};

/// Top-level manifest document written next to every run's output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Producing tool, always "rendezvous".
    pub tool: String,
    /// Crate version that produced the run.
    pub version: String,
    #[serde(flatten)]
    pub plan: Plan,
    /// Wall-clock duration of the original run, informational only.
    pub duration_ms: u64,
}

/// The resolved command: everything needed to re-run it exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Plan {
    Sim(SimPlan),
    Theory(TheoryPlan),
    Oracle(OraclePlan),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimPlan {
    pub setting: String,
    pub algorithms: Vec<String>,
    pub n_total: u32,
    pub n1: u32,
    pub n2: u32,
    pub n12_values: Vec<u32>,
    pub layout: String,
    /// Drift model in CLI syntax: "fixed:D" or "uniform:LO:HI".
    pub drift: String,
    pub experiments: u32,
    pub slots: u32,
    pub seed: u64,
    /// Worker count of the original run; 0 means auto. Output does not
    /// depend on it, it is recorded for performance reproduction only.
    pub threads: usize,
    pub format: String,
    pub t0: u32,
    pub p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryPlan {
    pub n1: u32,
    pub n2: u32,
    pub n12_values: Vec<u32>,
    pub t0: u32,
    pub p: f64,
    pub format: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OraclePlan {
    pub n_total: u32,
    pub c1: Vec<u32>,
    pub c2: Vec<u32>,
    pub check: String,
    pub samples: u64,
    pub seed: u64,
}

impl RunManifest {
    pub fn new(plan: Plan, duration_ms: u64) -> Self {
        Self {
            tool: "rendezvous".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            plan,
            duration_ms,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim_plan() -> Plan {
        Plan::Sim(SimPlan {
            setting: "sync".into(),
            algorithms: vec!["lsh2".into(), "random".into()],
            n_total: 64,
            n1: 15,
            n2: 15,
            n12_values: vec![3, 5, 9],
            layout: "uniform".into(),
            drift: "uniform:1:100".into(),
            experiments: 500,
            slots: 2000,
            seed: 7,
            threads: 0,
            format: "csv".into(),
            t0: 20,
            p: 0.5,
        })
    }

    #[test]
    fn manifest_round_trips_and_tags_the_command() {
        let m = RunManifest::new(sim_plan(), 1234);
        let json = m.to_json_pretty();
        assert!(json.contains("\"command\": \"sim\""));
        assert!(json.contains("\"tool\": \"rendezvous\""));
        let back = RunManifest::from_json(&json).unwrap();
        match back.plan {
            Plan::Sim(p) => {
                assert_eq!(p.n12_values, vec![3, 5, 9]);
                assert_eq!(p.seed, 7);
                assert_eq!(p.algorithms, vec!["lsh2", "random"]);
            }
            _ => panic!("wrong plan variant"),
        }
        assert_eq!(back.duration_ms, 1234);
    }

    #[test]
    fn oracle_plan_round_trips() {
        let m = RunManifest::new(
            Plan::Oracle(OraclePlan {
                n_total: 5,
                c1: vec![0, 1],
                c2: vec![1, 2],
                check: "lsh2".into(),
                samples: 20_000,
                seed: 0,
            }),
            9,
        );
        let line = m.to_json_line();
        assert!(line.contains("\"command\":\"oracle\""));
        let back = RunManifest::from_json(&line).unwrap();
        match back.plan {
            Plan::Oracle(p) => assert_eq!(p.c2, vec![1, 2]),
            _ => panic!("wrong plan variant"),
        }
    }
}
