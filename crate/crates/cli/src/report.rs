use std::fmt::{self, Write as _};

use incver_core::mini::PreorderNumbering;
use incver_core::reliability::ProbExpr;
use incver_core::safety::{Step, Verdict};
use incver_core::scalar::format_significant;
use incver_core::{Rational, RecomputeStats, ReuseStats};
use serde::Serialize;

/// Significant digits of decimal probabilities in reports.
pub const DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub verdict: Option<String>,
    /// Decimal rendering of a constant reliability.
    pub value: Option<String>,
    /// The same value as a reduced fraction.
    pub exact: Option<String>,
    /// Symbolic result when the value depends on unknown truth probabilities.
    pub expression: Option<String>,
    pub witness: Option<Vec<String>>,
    pub tuples_processed: Option<usize>,
}

impl Outcome {
    pub fn reliability(value: &ProbExpr<Rational>) -> Self {
        let constant = value.as_constant();
        Outcome {
            verdict: None,
            value: constant.as_ref().map(|c| format_significant(c, DIGITS)),
            exact: constant.as_ref().map(Rational::to_string),
            expression: constant.is_none().then(|| value.to_string()),
            witness: None,
            tuples_processed: None,
        }
    }

    pub fn safety(verdict: Verdict, witness: Option<&[Step]>, tuples: usize) -> Self {
        Outcome {
            verdict: Some(verdict.to_string()),
            value: None,
            exact: None,
            expression: None,
            witness: witness.map(|w| w.iter().map(Step::to_string).collect()),
            tuples_processed: Some(tuples),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReuseReport {
    pub tokens_reparsed: usize,
    pub nodes_rebuilt: usize,
    pub nodes_reused: usize,
    pub subcontext: [usize; 2],
}

impl From<&ReuseStats> for ReuseReport {
    fn from(s: &ReuseStats) -> Self {
        ReuseReport {
            tokens_reparsed: s.tokens_reparsed,
            nodes_rebuilt: s.nodes_rebuilt,
            nodes_reused: s.nodes_reused,
            subcontext: [s.subcontext.start, s.subcontext.end],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecomputeReport {
    /// Preorder numbers of the nodes whose attributes were recomputed, in
    /// recomputation order.
    pub nodes: Vec<usize>,
    pub attributes_recomputed: usize,
    pub attributes_reused: usize,
}

impl RecomputeReport {
    pub fn new(stats: &RecomputeStats, numbering: &PreorderNumbering) -> Self {
        RecomputeReport {
            nodes: stats.recomputed.iter().filter_map(|id| numbering.number(*id)).collect(),
            attributes_recomputed: stats.attributes_recomputed,
            attributes_reused: stats.attributes_reused,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub schema: String,
    pub programs: Vec<String>,
    pub result: Outcome,
    /// The old version's from-scratch result (`diff-verify` only).
    pub previous: Option<Outcome>,
    pub reuse: Option<ReuseReport>,
    pub recompute: Option<RecomputeReport>,
    pub warnings: Vec<String>,
    pub wall_time_ms: f64,
}

fn write_outcome(out: &mut String, label: &str, o: &Outcome) -> fmt::Result {
    if let Some(v) = &o.verdict {
        writeln!(out, "{label}: {v}")?;
    }
    if let (Some(v), Some(e)) = (&o.value, &o.exact) {
        writeln!(out, "{label}: {v} ({e})")?;
    }
    if let Some(e) = &o.expression {
        writeln!(out, "{label}: {e}")?;
    }
    if let Some(w) = &o.witness {
        writeln!(out, "  witness: [{}]", w.join(", "))?;
    }
    if let Some(t) = o.tuples_processed {
        writeln!(out, "  templates: {t}")?;
    }
    Ok(())
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = self.write_text(&mut out);
        out
    }

    fn write_text(&self, out: &mut String) -> fmt::Result {
        writeln!(out, "{} ({}): {}", self.command, self.schema, self.programs.join(" -> "))?;
        if let Some(p) = &self.previous {
            write_outcome(out, "old", p)?;
        }
        write_outcome(out, if self.previous.is_some() { "new" } else { "result" }, &self.result)?;
        if let Some(r) = &self.reuse {
            writeln!(
                out,
                "reparsed {} tokens in [{}, {}); nodes rebuilt {}, reused {}",
                r.tokens_reparsed, r.subcontext[0], r.subcontext[1], r.nodes_rebuilt, r.nodes_reused
            )?;
        }
        if let Some(r) = &self.recompute {
            let nodes: Vec<String> = r.nodes.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "recomputed nodes [{}]; attributes recomputed {}, reused {}",
                nodes.join(", "),
                r.attributes_recomputed,
                r.attributes_reused
            )?;
        }
        for w in &self.warnings {
            writeln!(out, "warning: {w}")?;
        }
        writeln!(out, "time: {:.3} ms", self.wall_time_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DumpNode {
    pub number: Option<usize>,
    pub id: u64,
    pub label: String,
    pub span: [usize; 2],
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeDump {
    pub root_rule: String,
    pub tokens: usize,
    pub nodes: Vec<DumpNode>,
}

impl TreeDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let number = n.number.map_or(String::new(), |k| format!("({k}) "));
            let _ = writeln!(out, "{:indent$}{number}#{} {} [{}, {})", "", n.id, n.label, n.span[0], n.span[1], indent = n.depth * 2);
        }
        out
    }
}
