//! JSON reports shared by the command-line tool and the acceptance suite.
//!
//! Every report has the same envelope: tool name and version, command,
//! ring, `n`, bounds, budget, seed and a verdict, with the command-specific
//! data under `result`. Reports carry no timings, so identical inputs give
//! byte-identical output.

use serde::Serialize;
use serde_json::{json, Value};

use crate::angulation::{is_n_angle, strip_units, Decomposition, Obstruction};
use crate::error::{Error, Result};
use crate::goodness::{
    associated_n_angle, complete_base, complete_octahedron, fill_in_space, find_good_fill_in, run_counterexample, search_middling_extension,
    search_verdier, MiddlingOutcome,
};
use crate::matrix::Matrix;
use crate::props;
use crate::ring::RingSpec;
use crate::sequence::{NSigmaSequence, SequenceMorphism};

pub const TOOL_NAME: &str = "nangle";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ReportVerdict {
    Member,
    NotMember,
    NotCandidate,
    Good,
    NotGood,
    Found,
    NoneExhaustive,
    NoneWithinBudget,
    Pass,
    Fail,
}

impl ReportVerdict {
    /// Process exit status: 1 when a budget ran out, 0 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            ReportVerdict::NoneWithinBudget => 1,
            _ => 0,
        }
    }
}

impl From<crate::goodness::Verdict> for ReportVerdict {
    fn from(v: crate::goodness::Verdict) -> Self {
        match v {
            crate::goodness::Verdict::Found => ReportVerdict::Found,
            crate::goodness::Verdict::NoneExhaustive => ReportVerdict::NoneExhaustive,
            crate::goodness::Verdict::NoneWithinBudget => ReportVerdict::NoneWithinBudget,
        }
    }
}

/// Parameters echoed in every report; `None` prints as `null`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub ring: Option<RingSpec>,
    pub n: Option<usize>,
    pub rank_bound: Option<usize>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub params: Params,
    pub verdict: ReportVerdict,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({
            "tool": { "name": TOOL_NAME, "version": TOOL_VERSION },
            "command": self.command,
            "ring": self.params.ring,
            "n": self.params.n,
            "rank_bound": self.params.rank_bound,
            "budget": self.params.budget,
            "seed": self.params.seed,
            "verdict": self.verdict,
            "result": self.result,
        })
    }

    /// Pretty JSON with a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("reports are plain JSON");
        s.push('\n');
        s
    }
}

fn frame(a: &NSigmaSequence) -> Params {
    Params { ring: Some(a.ring()), n: Some(a.n()), ..Params::default() }
}

pub fn decomposition_json(d: &Decomposition) -> Value {
    let obstruction = d.obstruction.as_ref().map(|o| match o {
        Obstruction::UnequalRanks(r) => json!({ "kind": "unequal_ranks", "ranks": r }),
        Obstruction::SingularResidue(i) => json!({ "kind": "singular_residue", "map": i }),
        Obstruction::Monodromy(m) => json!({ "kind": "monodromy", "residue": m.to_rows() }),
    });
    json!({
        "trivial": d.trivial,
        "fp_rank": d.fp_rank,
        "witness": d.witness.iter().map(Matrix::to_json).collect::<Vec<_>>(),
        "residual": d.residual.as_ref().map(NSigmaSequence::to_json),
        "obstruction": obstruction,
    })
}

/// Membership with its certificate. For a non-candidate the other predicates are skipped.
pub fn check(a: &NSigmaSequence) -> Result<Report> {
    if !a.is_candidate() {
        let result = json!({ "candidate": false, "exact": null, "contractible": null, "n_angle": null, "decomposition": null });
        return Ok(Report { command: "check", params: frame(a), verdict: ReportVerdict::NotCandidate, result });
    }
    let d = strip_units(a)?;
    let verdict = if d.is_member() { ReportVerdict::Member } else { ReportVerdict::NotMember };
    let result = json!({
        "candidate": true,
        "exact": a.is_exact()?,
        "contractible": d.is_contractible(),
        "n_angle": d.is_member(),
        "decomposition": decomposition_json(&d),
    });
    Ok(Report { command: "check", params: frame(a), verdict, result })
}

fn goodness_report(command: &'static str, phi: &SequenceMorphism) -> Result<Report> {
    let good = crate::goodness::is_good(phi)?;
    let c = phi.mapping_cone()?;
    let result = json!({
        "good": good,
        "is_weak_isomorphism": phi.is_weak_isomorphism(),
        "cone": c.to_json(),
        "cone_decomposition": decomposition_json(&strip_units(&c)?),
    });
    let verdict = if good { ReportVerdict::Good } else { ReportVerdict::NotGood };
    Ok(Report { command, params: frame(phi.source()), verdict, result })
}

/// The mapping cone and whether it is an n-angle.
pub fn cone(phi: &SequenceMorphism) -> Result<Report> {
    goodness_report("cone", phi)
}

pub fn good(phi: &SequenceMorphism) -> Result<Report> {
    goodness_report("good", phi)
}

/// Counts the fill-ins of a square and looks for a good one.
pub fn fill_in(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix, budget: u64) -> Result<Report> {
    let count = fill_in_space(a, b, phi1, phi2)?.count();
    let found = find_good_fill_in(a, b, phi1, phi2, budget)?;
    let verdict = match (&found, count <= budget as u128) {
        (Some(_), _) => ReportVerdict::Found,
        (None, true) => ReportVerdict::NoneExhaustive,
        (None, false) => ReportVerdict::NoneWithinBudget,
    };
    let result = json!({
        "fill_in_count": count.to_string(),
        "good_fill_in": found.as_ref().map(SequenceMorphism::to_json),
    });
    Ok(Report { command: "fillin", params: Params { budget: Some(budget), ..frame(a) }, verdict, result })
}

fn middling_result(outcome: &MiddlingOutcome, stats: &crate::goodness::SearchStats) -> Value {
    json!({
        "stats": stats,
        "diagram": outcome.diagram().map(|d| d.to_json()),
    })
}

pub fn middling(phi: &SequenceMorphism, rank_bound: usize, budget: u64) -> Result<Report> {
    let (outcome, stats) = search_middling_extension(phi, rank_bound, budget)?;
    Ok(Report {
        command: "middling",
        params: Params { rank_bound: Some(rank_bound), budget: Some(budget), ..frame(phi.source()) },
        verdict: outcome.verdict().into(),
        result: middling_result(&outcome, &stats),
    })
}

pub fn verdier(phi: &SequenceMorphism, budget: u64) -> Result<Report> {
    let w = search_verdier(phi, budget)?;
    let verdict = if w.is_some() { ReportVerdict::Found } else { ReportVerdict::NoneWithinBudget };
    let result = json!({ "witness": w.as_ref().map(|w| w.to_json()) });
    Ok(Report { command: "verdier", params: Params { budget: Some(budget), ..frame(phi.source()) }, verdict, result })
}

/// An octahedron on `top` and the composable `link`, with middle and bottom
/// rows the standard completions of `link·α₁` and `link`.
pub fn octahedron(top: &NSigmaSequence, link: &Matrix, budget: u64) -> Result<Report> {
    if link.cols() != top.rank(1) || link.ring() != top.ring() {
        return Err(Error::Shape("link must start at the second object of the top row".into()));
    }
    if !is_n_angle(top) {
        return Err(Error::Precondition("top row must be an n-angle".into()));
    }
    let n = top.n();
    let middle = complete_base(&(link * top.map(0)), n)?;
    let bottom = complete_base(link, n)?;
    let w = complete_octahedron(top, &middle, &bottom, None, None, budget)?;
    let verdict = if w.is_some() { ReportVerdict::Found } else { ReportVerdict::NoneWithinBudget };
    let result = match &w {
        Some(w) => json!({ "witness": w.to_json(), "associated": associated_n_angle(w)?.to_json() }),
        None => json!({ "witness": null, "associated": null }),
    };
    Ok(Report { command: "octa", params: Params { budget: Some(budget), ..frame(top) }, verdict, result })
}

pub fn counterexample(n: usize, ring: RingSpec, rank_bound: usize, budget: u64) -> Result<Report> {
    let (report, outcome) = run_counterexample(n, ring, rank_bound, budget)?;
    let mut result = serde_json::to_value(&report).expect("plain data");
    result["diagram"] = outcome.diagram().map(|d| d.to_json()).unwrap_or(Value::Null);
    Ok(Report {
        command: "counterexample",
        params: Params { ring: Some(ring), n: Some(n), rank_bound: Some(rank_bound), budget: Some(budget), seed: None },
        verdict: report.verdict.into(),
        result,
    })
}

pub fn property_runs(seed: u64, cases: usize) -> Report {
    let outcomes = props::run_all(seed, cases);
    let verdict = if outcomes.iter().all(props::PropertyOutcome::passed) { ReportVerdict::Pass } else { ReportVerdict::Fail };
    Report {
        command: "props",
        params: Params { seed: Some(seed), ..Params::default() },
        verdict,
        result: json!({ "cases": cases, "properties": outcomes }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_fields() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let rep = check(&NSigmaSequence::f_p_sequence(r, 4, 1).unwrap()).unwrap();
        let v = rep.to_json();
        assert_eq!(v["tool"]["name"], TOOL_NAME);
        assert_eq!(v["verdict"], "MEMBER");
        assert_eq!(v["n"], 4);
        assert!(v["seed"].is_null());
        assert!(rep.render().ends_with("}\n"));
    }

    #[test]
    fn counterexample_report_is_stable() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let a = counterexample(4, r, 1, 1_000_000).unwrap().render();
        let b = counterexample(4, r, 1, 1_000_000).unwrap().render();
        assert_eq!(a, b);
        assert!(a.contains("NONE_EXHAUSTIVE"));
    }
}
