//! Seeded property runs. Each draws its instances up front from a seeded
//! stream, checks them through [`crate::exec`] and reports how many failed.

use rand::Rng;
use serde::Serialize;

use crate::angulation::{decide_contractible_homotopy, is_n_angle, oracle_is_n_angle, strip_units, verify_summand_lemma, BlockShape};
use crate::exec;
use crate::goodness::{enumerate_fill_ins, fill_in_space, find_good_fill_in};
use crate::matrix::Matrix;
use crate::random::{self, seeded};
use crate::ring::{Elem, RingSpec};
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::smith::{is_invertible, smith_normal_form};
use crate::solve::solve;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub cases: u64,
    pub failures: u64,
}

impl PropertyOutcome {
    fn tally(name: &str, results: &[bool]) -> Self {
        PropertyOutcome {
            name: name.into(),
            cases: results.len() as u64,
            failures: results.iter().filter(|ok| !**ok).count() as u64,
        }
    }

    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

fn z4() -> RingSpec {
    RingSpec::z_mod_p2(2).expect("p = 2")
}

const ORACLE_BUDGET: u64 = 10_000_000;

/// `is_n_angle` against the brute-force oracle: every candidate with `n = 4`
/// over `Z/4` and ranks at most 1, then random candidates with one rank 2.
pub fn membership_agreement(seed: u64, random_cases: usize) -> Vec<PropertyOutcome> {
    let ring = z4();
    let mut exhaustive = Vec::new();
    for mask in 0..16u32 {
        let ranks: Vec<usize> = (0..4).map(|i| ((mask >> i) & 1) as usize).collect();
        let cells: Vec<(usize, usize)> = (0..4).map(|i| (ranks[(i + 1) % 4], ranks[i])).collect();
        let free: usize = cells.iter().map(|(r, c)| r * c).sum();
        for code in 0..ring.order().pow(free as u32) {
            let mut c = code;
            let maps = cells
                .iter()
                .map(|&(r, k)| {
                    Matrix::from_fn(ring, r, k, |_, _| {
                        let e = Elem((c % ring.order()) as u8);
                        c /= ring.order();
                        e
                    })
                })
                .collect();
            let a = NSigmaSequence::new(ring, ranks.clone(), maps).expect("shapes");
            if a.is_candidate() {
                exhaustive.push(a);
            }
        }
    }
    let mut rng = seeded(seed);
    let sampled: Vec<NSigmaSequence> = (0..random_cases)
        .map(|_| {
            let mut ranks: Vec<usize> = (0..4).map(|_| rng.random_range(0..=1)).collect();
            ranks[rng.random_range(0..4)] = 2;
            random::candidate_with_ranks(ring, &ranks, &mut rng)
        })
        .collect();
    let agree = |a: &NSigmaSequence| oracle_is_n_angle(a, ORACLE_BUDGET).is_ok_and(|o| o == is_n_angle(a));
    vec![
        PropertyOutcome::tally("membership oracle, exhaustive ranks <= 1", &exec::map(&exhaustive, agree)),
        PropertyOutcome::tally("membership oracle, random with a rank 2", &exec::map(&sampled, agree)),
    ]
}

/// The homotopy solver and stripping agree on contractibility.
pub fn contractibility_agreement(seed: u64, cases: usize) -> PropertyOutcome {
    let rings = [z4(), RingSpec::z_mod_p2(3).expect("p = 3"), RingSpec::dual_numbers(2).expect("p = 2")];
    let mut frames = Vec::new();
    for &ring in &rings {
        for n in [4, 5, 6] {
            if n % 2 == 0 || ring.two_p_vanishes() {
                frames.push((ring, n));
            }
        }
    }
    let mut rng = seeded(seed);
    let instances: Vec<NSigmaSequence> = (0..cases)
        .map(|k| {
            let (ring, n) = frames[k % frames.len()];
            if rng.random_bool(0.5) {
                random::contractible(ring, n, 2, &mut rng)
            } else {
                random::candidate(ring, n, 2, &mut rng)
            }
        })
        .collect();
    let results = exec::map(&instances, |a| {
        let by_homotopy = decide_contractible_homotopy(a);
        let by_stripping = strip_units(a).is_ok_and(|d| d.is_contractible());
        by_homotopy.as_ref().is_none_or(|h| h.verify(a)) && by_homotopy.is_some() == by_stripping
    });
    PropertyOutcome::tally("contractibility: homotopy vs stripping", &results)
}

/// Membership is closed under direct sums and isomorphisms.
pub fn closure_under_sums_and_isomorphisms(seed: u64, cases: usize) -> PropertyOutcome {
    let ring = z4();
    let mut rng = seeded(seed);
    let instances: Vec<(NSigmaSequence, NSigmaSequence, NSigmaSequence)> = (0..cases)
        .map(|_| {
            let a = random::member(ring, 4, 2, &mut rng);
            let b = random::member(ring, 4, 2, &mut rng);
            let c = random::conjugate_randomly(&a, &mut rng);
            (a, b, c)
        })
        .collect();
    let results = exec::map(&instances, |(a, b, c)| is_n_angle(&a.direct_sum(b).expect("same frame")) && is_n_angle(c));
    PropertyOutcome::tally("(N1)(a) sums and conjugates of members", &results)
}

/// Every `ΓR` at every slot, ranks 1 and 2, is a member.
pub fn trivial_sequences_are_members() -> PropertyOutcome {
    let ring = z4();
    let all: Vec<NSigmaSequence> =
        (1..=4).flat_map(|slot| (1..=2).map(move |r| NSigmaSequence::trivial_gamma(ring, 4, r, slot).expect("valid slot"))).collect();
    PropertyOutcome::tally("(N1)(b) trivial sequences", &exec::map(&all, is_n_angle))
}

/// Rotation preserves membership and non-membership.
pub fn rotation_invariance(seed: u64, cases: usize) -> Vec<PropertyOutcome> {
    let ring = z4();
    let mut rng = seeded(seed);
    let members: Vec<NSigmaSequence> = (0..cases).map(|_| random::member(ring, 4, 2, &mut rng)).collect();
    let mut others = Vec::with_capacity(cases);
    while others.len() < cases {
        let a = random::candidate(ring, 4, 2, &mut rng);
        if !is_n_angle(&a) {
            others.push(a);
        }
    }
    let check = |a: &NSigmaSequence| {
        let m = is_n_angle(a);
        is_n_angle(&a.rotate_left()) == m && is_n_angle(&a.rotate_right()) == m && a.rotate_left().rotate_right() == *a
    };
    vec![
        PropertyOutcome::tally("(N2) rotation of members", &exec::map(&members, check)),
        PropertyOutcome::tally("(N2) rotation of non-members", &exec::map(&others, check)),
    ]
}

fn squares(seed: u64, cases: usize) -> Vec<(NSigmaSequence, NSigmaSequence, Matrix, Matrix)> {
    let mut rng = seeded(seed);
    (0..cases).map(|_| random::commuting_square(z4(), 4, 2, &mut rng)).collect()
}

/// Every commuting square has a fill-in.
pub fn fill_ins_exist(seed: u64, cases: usize) -> PropertyOutcome {
    let results = exec::map(&squares(seed, cases), |(a, b, p1, p2)| {
        fill_in_space(a, b, p1, p2).is_ok_and(|s| s.count() > 0 && s.iter().next().is_some_and(|m| m.is_morphism()))
    });
    PropertyOutcome::tally("(N3) fill-ins exist", &results)
}

/// Every commuting square has a fill-in whose cone is an n-angle.
pub fn good_fill_ins_exist(seed: u64, cases: usize, budget: u64) -> PropertyOutcome {
    let results = exec::map(&squares(seed, cases), |(a, b, p1, p2)| {
        find_good_fill_in(a, b, p1, p2, budget).is_ok_and(|m| m.is_some_and(|m| m.is_morphism() && is_n_angle(&m.cone_unchecked())))
    });
    PropertyOutcome::tally("(N4) good fill-ins exist", &results)
}

/// The cone of an identity is contractible.
pub fn identity_cones_contract(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = seeded(seed);
    let members: Vec<NSigmaSequence> = (0..cases).map(|_| random::member(z4(), 4, 2, &mut rng)).collect();
    let results = exec::map(&members, |a| {
        let cone = SequenceMorphism::identity(a).mapping_cone().expect("identity is a morphism");
        decide_contractible_homotopy(&cone).is_some_and(|h| h.verify(&cone))
    });
    PropertyOutcome::tally("cone of the identity is contractible", &results)
}

/// A random member whose first map is the `1×1` matrix `p` (or `0`).
pub fn member_with_base<G: Rng + ?Sized>(ring: RingSpec, n: usize, base_is_p: bool, rng: &mut G) -> NSigmaSequence {
    let mut gamma = vec![0usize; n];
    // Interior copies of ΓR never touch positions 0 and 1.
    for g in gamma.iter_mut().take(n - 1).skip(2) {
        *g = rng.random_range(0..=1);
    }
    let f = usize::from(base_is_p);
    if !base_is_p {
        gamma[1] = 1;
        gamma[n - 1] = 1;
    }
    let block = BlockShape { gamma, f }.build(ring).expect("valid frame");
    let u = random::invertible(ring, 1, rng);
    let mut us: Vec<Matrix> = block.ranks().iter().map(|&r| random::invertible(ring, r, rng)).collect();
    us[0] = u.clone();
    us[1] = u;
    block.conjugate(&us).expect("invertible conjugators")
}

/// Members with base `p` contain `F(p)`; with base `0` both rotated `ΓR`.
pub fn summand_lemma(seed: u64, cases: usize) -> Vec<PropertyOutcome> {
    let mut rng = seeded(seed);
    let mut run = |base_is_p: bool| {
        let xs: Vec<NSigmaSequence> = (0..cases).map(|_| member_with_base(z4(), 4, base_is_p, &mut rng)).collect();
        exec::map(&xs, |a| verify_summand_lemma(a).is_ok_and(|r| r.holds && r.base_is_p == base_is_p))
    };
    let p = run(true);
    let zero = run(false);
    vec![
        PropertyOutcome::tally("summand lemma, base p", &p),
        PropertyOutcome::tally("summand lemma, base 0", &zero),
    ]
}

pub fn members_are_exact(seed: u64, cases: usize) -> PropertyOutcome {
    let mut rng = seeded(seed);
    let rings = [z4(), RingSpec::z_mod_p2(3).expect("p = 3"), RingSpec::dual_numbers(2).expect("p = 2")];
    let members: Vec<NSigmaSequence> = (0..cases).map(|k| random::member(rings[k % 3], 4 + 2 * (k % 2), 2, &mut rng)).collect();
    PropertyOutcome::tally("members are exact", &exec::map(&members, |a| a.is_exact().unwrap_or(false)))
}

/// `solve` against scanning every vector, for every system with at most two
/// unknowns and two equations over `Z/4` and `Z/9`.
pub fn solve_matches_brute_force() -> PropertyOutcome {
    let mut shapes = Vec::new();
    for ring in [z4(), RingSpec::z_mod_p2(3).expect("p = 3")] {
        for rows in 1..=2 {
            for cols in 1..=2 {
                shapes.push((ring, rows, cols));
            }
        }
    }
    let results: Vec<bool> = shapes
        .iter()
        .flat_map(|&(ring, rows, cols)| {
            let q = ring.order();
            let matrices: Vec<Matrix> = (0..q.pow((rows * cols) as u32)).map(|code| decode_matrix(ring, rows, cols, code)).collect();
            exec::map(&matrices, |m| {
                (0..q.pow(rows as u32)).all(|code| {
                    let b = decode_vector(ring, rows, code);
                    system_agrees(m, &b)
                })
            })
        })
        .collect();
    PropertyOutcome::tally("solve vs brute force", &results)
}

fn decode_vector(ring: RingSpec, len: usize, mut code: usize) -> Vec<Elem> {
    (0..len)
        .map(|_| {
            let e = Elem((code % ring.order()) as u8);
            code /= ring.order();
            e
        })
        .collect()
}

fn decode_matrix(ring: RingSpec, rows: usize, cols: usize, code: usize) -> Matrix {
    Matrix::from_entries(ring, rows, cols, decode_vector(ring, rows * cols, code)).expect("sizes match")
}

fn system_agrees(m: &Matrix, b: &[Elem]) -> bool {
    let ring = m.ring();
    let cols = m.cols();
    let mut brute: Vec<Vec<Elem>> = (0..ring.order().pow(cols as u32))
        .map(|code| decode_vector(ring, cols, code))
        .filter(|x| (m * &Matrix::column(ring, x)) == Matrix::column(ring, b))
        .collect();
    let Ok(space) = solve(m, b) else { return false };
    let mut got: Vec<Vec<Elem>> = space.iter().collect();
    brute.sort();
    got.sort();
    got == brute && space.count() == brute.len() as u128
}

/// `U·M·V = D` with `U`, `V` invertible, and `|im M|·|ker M| = |R|^cols`
/// with the kernel also counted by brute force.
pub fn smith_invariants(seed: u64, cases: usize) -> PropertyOutcome {
    let rings = [z4(), RingSpec::z_mod_p2(3).expect("p = 3"), RingSpec::dual_numbers(2).expect("p = 2"), RingSpec::z_mod_p2(5).expect("p = 5")];
    let mut rng = seeded(seed);
    let matrices: Vec<Matrix> = (0..cases)
        .map(|k| {
            let ring = rings[k % rings.len()];
            let (r, c) = (rng.random_range(0..=4), rng.random_range(0..=3));
            if rng.random_bool(0.3) {
                random::ideal_matrix(ring, r, c, &mut rng)
            } else {
                random::matrix(ring, r, c, &mut rng)
            }
        })
        .collect();
    let results = exec::map(&matrices, |m| {
        let ring = m.ring();
        let s = smith_normal_form(m);
        let diagonal_ok = &(&s.left * m) * &s.right == s.diagonal_matrix();
        let units_ok = is_invertible(&s.left) && is_invertible(&s.right);
        let total = 2 * m.cols() as u32;
        let card_ok = s.log_image() + s.log_kernel() == total;
        let kernel = (0..ring.order().pow(m.cols() as u32))
            .filter(|&code| (m * &Matrix::column(ring, &decode_vector(ring, m.cols(), code))).is_zero())
            .count();
        let kernel_ok = kernel == (ring.p() as usize).pow(s.log_kernel());
        diagonal_ok && units_ok && card_ok && kernel_ok
    });
    PropertyOutcome::tally("smith form invariants", &results)
}

/// Every fill-in enumerated for a square is a morphism, and the count matches the listing.
pub fn fill_in_listing_is_consistent(seed: u64, cases: usize) -> PropertyOutcome {
    let results = exec::map(&squares(seed, cases), |(a, b, p1, p2)| match enumerate_fill_ins(a, b, p1, p2, 1 << 16) {
        Ok(all) => all.iter().all(SequenceMorphism::is_morphism),
        Err(crate::Error::BudgetExceeded { .. }) => true,
        Err(_) => false,
    });
    PropertyOutcome::tally("fill-in listings are morphisms", &results)
}

/// Everything above at the given scale (1 = the default case counts).
pub fn run_all(seed: u64, cases: usize) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();
    out.extend(membership_agreement(seed, cases));
    out.push(contractibility_agreement(seed, cases));
    out.push(closure_under_sums_and_isomorphisms(seed, cases));
    out.push(trivial_sequences_are_members());
    out.extend(rotation_invariance(seed, cases));
    out.push(fill_ins_exist(seed, cases));
    out.push(good_fill_ins_exist(seed, cases, 1 << 20));
    out.push(identity_cones_contract(seed, cases));
    out.extend(summand_lemma(seed, cases));
    out.push(members_are_exact(seed, cases));
    out.push(smith_invariants(seed, cases));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_pass() {
        for o in run_all(3, 12) {
            assert!(o.passed(), "{o:?}");
        }
        assert!(fill_in_listing_is_consistent(3, 10).passed());
    }
}
