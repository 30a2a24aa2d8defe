//! Metrics export shared by the MPC and clique executors.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tzmpc_core::clique::CliqueMetrics;
use tzmpc_core::mpc::Metrics;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub label: String,
    pub rounds: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub messages: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `mpc` (per-machine word budget) or `clique` (per-pair message budget).
    pub budget: String,
    pub rounds: u64,
    pub phases: Vec<PhaseRow>,
    pub messages: u64,
    pub words: u64,
    pub max_mem: u64,
    pub violations: u64,
}

impl From<&Metrics> for MetricsReport {
    fn from(m: &Metrics) -> MetricsReport {
        MetricsReport {
            budget: "mpc".into(),
            rounds: m.rounds,
            phases: m.phases.iter().map(|(l, r)| PhaseRow { label: l.clone(), rounds: *r, messages: None }).collect(),
            messages: m.messages,
            words: m.words,
            max_mem: m.max_mem,
            violations: m.violations,
        }
    }
}

impl MetricsReport {
    /// Clique messages carry at most `c_w` words each; `words` is that upper
    /// bound and `max_mem` is not tracked.
    pub fn clique(m: &CliqueMetrics, c_w: u64) -> MetricsReport {
        MetricsReport {
            budget: "clique".into(),
            rounds: m.rounds,
            phases: m
                .phases
                .iter()
                .map(|p| PhaseRow { label: p.label.clone(), rounds: p.rounds, messages: Some(p.messages) })
                .collect(),
            messages: m.messages,
            words: m.messages * c_w,
            max_mem: 0,
            violations: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data");
        s.push('\n');
        s
    }

    /// One row per phase.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("budget,label,rounds,messages\n");
        for p in &self.phases {
            let msgs = p.messages.map(|m| m.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{}", self.budget, p.label, p.rounds, msgs);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema() {
        let mut m = Metrics { rounds: 5, messages: 9, words: 30, max_mem: 12, ..Metrics::default() };
        m.add_phase("sort", 3);
        m.add_phase("bf", 2);
        let r = MetricsReport::from(&m);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        for key in ["budget", "rounds", "phases", "messages", "words", "max_mem", "violations"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["phases"][1]["label"], "bf");
        assert!(v["phases"][0].get("messages").is_none());
        assert_eq!(r.to_csv(), "budget,label,rounds,messages\nmpc,sort,3,\nmpc,bf,2,\n");
        assert_eq!(serde_json::from_str::<MetricsReport>(&r.to_json()).unwrap(), r);
    }
}
