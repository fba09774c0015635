//! Structured run reports shared by the CLI commands, with deterministic
//! text and JSON rendering. Wall time is kept out of both renderings so
//! identical inputs and seeds produce identical output bytes.

use serde::Serialize;

use crate::selection::{BoundCertificate, SelectionResult};

/// One verified identity with its worst observed deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_rel_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    pub fn new(name: &str, max_rel_deviation: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            max_rel_deviation,
            tolerance,
            passed: max_rel_deviation.is_finite() && max_rel_deviation <= tolerance,
        }
    }
}

/// Analytic quantities for one approximation order k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KAnalytics {
    pub k: usize,
    /// Optimal error d_k: root of the squared singular value tail.
    pub tail_width: f64,
    /// Mean squared error under volume sampling; absent when k exceeds
    /// the rank.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_error: Option<f64>,
    /// Mean weighted Gram volume, k! times the elementary symmetric
    /// polynomial of the squared singular values.
    pub expected_volume: f64,
}

/// Full record of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub instance: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub analytics: Vec<KAnalytics>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub selections: Vec<SelectionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BoundCertificate>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub identities: Vec<IdentityCheck>,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn new(command: &str, instance: String, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            instance,
            seed,
            sigma: None,
            rank: None,
            analytics: Vec::new(),
            selections: Vec::new(),
            certificate: None,
            identities: Vec::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn all_identities_pass(&self) -> bool {
        self.identities.iter().all(|check| check.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("command: {}", self.command));
        line(format!("instance: {}", self.instance));
        line(format!("seed: {}", self.seed));
        if let Some(sigma) = &self.sigma {
            let formatted: Vec<String> = sigma.iter().map(|s| format!("{s:.17e}")).collect();
            line(format!("sigma: [{}]", formatted.join(", ")));
        }
        if let Some(rank) = self.rank {
            line(format!("rank: {rank}"));
        }
        for a in &self.analytics {
            let expected = match a.expected_error {
                Some(value) => format!(" expected_error={value:.17e}"),
                None => String::new(),
            };
            line(format!(
                "k={}: tail_width={:.17e}{} expected_volume={:.17e}",
                a.k, a.tail_width, expected, a.expected_volume
            ));
        }
        for s in &self.selections {
            line(format!(
                "selection[{}]: indices={:?} squared_error={:.17e} draws={}",
                s.method, s.indices, s.squared_error, s.draws_used
            ));
        }
        if let Some(c) = &self.certificate {
            let prefactor = match c.prefactor_squared {
                Some(value) => format!("{value:.17e}"),
                None => "undefined (zero tail)".to_string(),
            };
            line(format!(
                "certificate: k={} optimal_tail_squared={:.17e} achieved={:.17e} \
                 prefactor_squared={} satisfied={}",
                c.k, c.optimal_tail_squared, c.achieved_squared_error, prefactor, c.satisfied
            ));
        }
        for check in &self.identities {
            line(format!(
                "identity {}: max_rel_deviation={:.3e} tolerance={:.1e} {}",
                check.name,
                check.max_rel_deviation,
                check.tolerance,
                if check.passed { "PASS" } else { "FAIL" }
            ));
        }
        out
    }
}
