//! Acceptance run: nine criteria, one line each. Built without the libtest
//! harness so the lines always print; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nangle_core::exec::with_jobs;
use nangle_core::goodness::{counterexample_morphism, is_good, search_middling_extension, Verdict};
use nangle_core::props::{self, PropertyOutcome};
use nangle_core::report;
use nangle_core::{Matrix, NSigmaSequence, RingSpec, SequenceMorphism};

const SEED: u64 = 20_240_601;
const RANK_BOUND: usize = 2;
const BUDGET: u64 = 50_000_000;
const COUNTEREXAMPLE_TIME: Duration = Duration::from_secs(600);
const MEMBERSHIP_TIME: Duration = Duration::from_secs(300);

const MEMBERSHIP_RANDOM: usize = 200;
const CONTRACTIBILITY: usize = 1000;
const AXIOM_CASES: usize = 500;
const SQUARES: usize = 100;
const CONES: usize = 200;
const SUMMANDS: usize = 100;
const EXACTNESS: usize = 500;
const SMITH: usize = 1000;

struct Line {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn from_outcomes(name: &'static str, outcomes: &[PropertyOutcome], minimum: &[u64]) -> Line {
    let passed = outcomes.iter().zip(minimum).all(|(o, &m)| o.passed() && o.cases >= m);
    let detail = outcomes.iter().map(|o| format!("{}: {}/{}", o.name, o.cases - o.failures, o.cases)).collect::<Vec<_>>().join("; ");
    Line { name, passed, detail }
}

fn z4() -> RingSpec {
    RingSpec::z_mod_p2(2).unwrap()
}

fn z9() -> RingSpec {
    RingSpec::z_mod_p2(3).unwrap()
}

fn counterexample() -> Line {
    let mut details = Vec::new();
    let mut passed = true;
    for ring in [z4(), z9()] {
        let start = Instant::now();
        let phi = counterexample_morphism(4, ring).unwrap();
        let good = is_good(&phi).unwrap();
        let (outcome, stats) = search_middling_extension(&phi, RANK_BOUND, BUDGET).unwrap();
        let elapsed = start.elapsed();
        let ok = phi.is_morphism() && !good && outcome.verdict() == Verdict::NoneExhaustive && elapsed <= COUNTEREXAMPLE_TIME;
        passed &= ok;
        details.push(format!(
            "{ring}: morphism={} good={good} verdict={:?} nodes={} in {:.2?}",
            phi.is_morphism(),
            outcome.verdict(),
            stats.nodes,
            elapsed
        ));
    }
    Line { name: "counterexample has no middling extension", passed, detail: details.join("; ") }
}

fn membership() -> Line {
    let start = Instant::now();
    let outcomes = props::membership_agreement(SEED, MEMBERSHIP_RANDOM);
    let mut line = from_outcomes("membership oracle agreement", &outcomes, &[1, MEMBERSHIP_RANDOM as u64]);
    line.passed &= start.elapsed() <= MEMBERSHIP_TIME;
    line.detail += &format!(" in {:.2?}", start.elapsed());
    line
}

fn axioms() -> Line {
    let mut outcomes = vec![props::closure_under_sums_and_isomorphisms(SEED, AXIOM_CASES), props::trivial_sequences_are_members()];
    outcomes.extend(props::rotation_invariance(SEED, AXIOM_CASES));
    outcomes.push(props::fill_ins_exist(SEED, SQUARES));
    outcomes.push(props::good_fill_ins_exist(SEED, SQUARES, BUDGET));
    let n = AXIOM_CASES as u64;
    from_outcomes("axiom instances", &outcomes, &[n, 8, n, n, SQUARES as u64, SQUARES as u64])
}

fn m(ring: RingSpec, rows: usize, cols: usize, entries: &[i64]) -> Matrix {
    Matrix::from_entries(ring, rows, cols, entries.iter().map(|&e| ring.from_int(e)).collect()).unwrap()
}

/// Cones written out by hand from the block formula.
fn cone_fixtures() -> Vec<(SequenceMorphism, NSigmaSequence)> {
    let mut out = Vec::new();

    // Zero except p at the last object, over Z/4.
    let r = z4();
    let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
    let phi = counterexample_morphism(4, r).unwrap();
    let plain = m(r, 2, 2, &[-2, 0, 0, 2]);
    let wrap = m(r, 2, 2, &[-2, 0, 2, 2]);
    let maps = vec![plain.clone(), plain.clone(), wrap, plain];
    out.push((phi, NSigmaSequence::new(r, vec![2; 4], maps).unwrap()));

    // Identity of F(p) over Z/9.
    let r = z9();
    let f9 = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
    let maps = vec![m(r, 2, 2, &[-3, 0, 1, 3]); 4];
    out.push((SequenceMorphism::identity(&f9), NSigmaSequence::new(r, vec![2; 4], maps).unwrap()));

    // From ΓR at slot 1 to F(p) over Z/4, with φ₁ = 1 and φ₂ = p.
    let r = z4();
    let gamma = NSigmaSequence::trivial_gamma(r, 4, 1, 1).unwrap();
    let comps = vec![m(r, 1, 1, &[1]), m(r, 1, 1, &[2]), m(r, 1, 0, &[]), m(r, 1, 0, &[])];
    let phi = SequenceMorphism::new(gamma, f.clone(), comps).unwrap();
    assert!(phi.is_morphism());
    // Objects: A₂ ⊕ B₁, A₃ ⊕ B₂, A₄ ⊕ B₃, A₁ ⊕ B₄ with ranks 2, 1, 1, 2.
    let maps = vec![m(r, 1, 2, &[2, 2]), m(r, 1, 1, &[2]), m(r, 2, 1, &[0, 2]), m(r, 2, 2, &[-1, 0, 1, 2])];
    out.push((phi, NSigmaSequence::new(r, vec![2, 1, 1, 2], maps).unwrap()));
    out
}

fn cones() -> Line {
    let identity = props::identity_cones_contract(SEED, CONES);
    let fixtures = cone_fixtures();
    let matched = fixtures.iter().filter(|(phi, expected)| phi.mapping_cone().is_ok_and(|c| &c == expected)).count();
    let mut line = from_outcomes("mapping cone identities", &[identity], &[CONES as u64]);
    line.passed &= matched == fixtures.len();
    line.detail += &format!("; hand-coded layouts: {matched}/{}", fixtures.len());
    line
}

fn main() -> ExitCode {
    let n = SUMMANDS as u64;
    let criteria: Vec<(usize, Box<dyn Fn() -> Line>)> = vec![
        (1, Box::new(counterexample)),
        (2, Box::new(membership)),
        (3, Box::new(|| {
            from_outcomes("contractibility agreement", &[props::contractibility_agreement(SEED, CONTRACTIBILITY)], &[CONTRACTIBILITY as u64])
        })),
        (4, Box::new(axioms)),
        (5, Box::new(cones)),
        (6, Box::new(move || from_outcomes("summand lemma", &props::summand_lemma(SEED, SUMMANDS), &[n, n]))),
        (7, Box::new(|| from_outcomes("members are exact", &[props::members_are_exact(SEED, EXACTNESS)], &[EXACTNESS as u64]))),
        (8, Box::new(|| {
            from_outcomes(
                "linear algebra floor",
                &[props::solve_matches_brute_force(), props::smith_invariants(SEED, SMITH)],
                &[1, SMITH as u64],
            )
        })),
        (9, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, run) in criteria {
        let line = run();
        println!("criterion {k} {}: {} ({})", if line.passed { "PASS" } else { "FAIL" }, line.name, line.detail);
        failed += usize::from(!line.passed);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn determinism() -> Line {
    let render = |jobs: usize, ring: RingSpec| with_jobs(jobs, || report::counterexample(4, ring, RANK_BOUND, BUDGET).unwrap().render());
    let mut same = 0;
    for ring in [z4(), z9()] {
        let runs = [render(1, ring), render(8, ring), render(1, ring), render(8, ring)];
        same += usize::from(runs.iter().all(|r| r == &runs[0]));
    }
    Line { name: "reports identical across worker counts", passed: same == 2, detail: format!("{same}/2 rings byte-identical") }
}
