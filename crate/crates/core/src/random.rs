//! Seeded random instances: matrices, members of the angulation and candidates.
//!
//! Everything draws from a caller-supplied [`Rng`], so a fixed seed gives a
//! fixed instance stream.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angulation::BlockShape;
use crate::matrix::Matrix;
use crate::ring::{Elem, RingSpec};
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::solve::SolutionSpace;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn elem<G: Rng + ?Sized>(ring: RingSpec, rng: &mut G) -> Elem {
    Elem(rng.random_range(0..ring.order()) as u8)
}

pub fn matrix<G: Rng + ?Sized>(ring: RingSpec, rows: usize, cols: usize, rng: &mut G) -> Matrix {
    Matrix::from_fn(ring, rows, cols, |_, _| elem(ring, rng))
}

/// Entries drawn from `(p)`.
pub fn ideal_matrix<G: Rng + ?Sized>(ring: RingSpec, rows: usize, cols: usize, rng: &mut G) -> Matrix {
    let p = ring.p() as u8;
    Matrix::from_fn(ring, rows, cols, |_, _| ring.from_parts(0, rng.random_range(0..p)))
}

/// Uniform over `GL_r(R)` by rejection; a random residue matrix is invertible
/// with probability above 1/4 for every `p`.
pub fn invertible<G: Rng + ?Sized>(ring: RingSpec, r: usize, rng: &mut G) -> Matrix {
    loop {
        let m = matrix(ring, r, r, rng);
        if m.residue_matrix().rank() == r {
            return m;
        }
    }
}

pub fn conjugate_randomly<G: Rng + ?Sized>(a: &NSigmaSequence, rng: &mut G) -> NSigmaSequence {
    let us: Vec<Matrix> = a.ranks().iter().map(|&r| invertible(a.ring(), r, rng)).collect();
    a.conjugate(&us).expect("invertible conjugators")
}

/// A block shape with every rank at most `max_rank`.
pub fn block_shape<G: Rng + ?Sized>(n: usize, max_rank: usize, rng: &mut G) -> BlockShape {
    loop {
        let f = rng.random_range(0..=max_rank.min(1));
        let gamma: Vec<usize> = (0..n).map(|_| rng.random_range(0..=max_rank.div_ceil(2))).collect();
        if (0..n).all(|j| gamma[j] + gamma[(j + n - 1) % n] + f <= max_rank) {
            return BlockShape { gamma, f };
        }
    }
}

/// A member of the angulation with ranks at most `max_rank`.
pub fn member<G: Rng + ?Sized>(ring: RingSpec, n: usize, max_rank: usize, rng: &mut G) -> NSigmaSequence {
    let block = block_shape(n, max_rank, rng).build(ring).expect("valid frame");
    conjugate_randomly(&block, rng)
}

/// Copies of `ΓR` on the given ranks, placed greedily in random slot order,
/// plus the leftover ranks per position.
fn gamma_fill<G: Rng + ?Sized>(ranks: &[usize], rng: &mut G) -> (Vec<usize>, Vec<usize>) {
    let n = ranks.len();
    let mut left = ranks.to_vec();
    let mut gamma = vec![0usize; n];
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    for s in slots {
        let room = left[s].min(left[(s + 1) % n]);
        let k = rng.random_range(0..=room);
        gamma[s] += k;
        left[s] -= k;
        left[(s + 1) % n] -= k;
    }
    (gamma, left)
}

/// A candidate n-angle with exactly these ranks: copies of `ΓR` plus a random
/// reduced part, conjugated at random. Members and non-members both occur.
pub fn candidate_with_ranks<G: Rng + ?Sized>(ring: RingSpec, ranks: &[usize], rng: &mut G) -> NSigmaSequence {
    let n = ranks.len();
    let (gamma, left) = gamma_fill(ranks, rng);
    let mut parts: Vec<NSigmaSequence> =
        (0..n).map(|s| NSigmaSequence::trivial_gamma(ring, n, gamma[s], s + 1).expect("valid frame")).collect();
    let reduced = (0..n).map(|i| ideal_matrix(ring, left[(i + 1) % n], left[i], rng)).collect();
    parts.push(NSigmaSequence::new(ring, left, reduced).expect("shapes fit"));
    conjugate_randomly(&NSigmaSequence::sum_all(ring, n, &parts).expect("valid frame"), rng)
}

/// A candidate with random ranks at most `max_rank`.
pub fn candidate<G: Rng + ?Sized>(ring: RingSpec, n: usize, max_rank: usize, rng: &mut G) -> NSigmaSequence {
    let ranks: Vec<usize> = (0..n).map(|_| rng.random_range(0..=max_rank)).collect();
    candidate_with_ranks(ring, &ranks, rng)
}

/// A contractible candidate: only copies of `ΓR`, conjugated at random.
pub fn contractible<G: Rng + ?Sized>(ring: RingSpec, n: usize, max_rank: usize, rng: &mut G) -> NSigmaSequence {
    let shape = loop {
        let s = block_shape(n, max_rank, rng);
        if s.f == 0 {
            break s;
        }
    };
    conjugate_randomly(&shape.build(ring).expect("valid frame"), rng)
}

/// A uniformly random point of a non-empty solution set.
pub fn solution<G: Rng + ?Sized>(ring: RingSpec, space: &SolutionSpace, rng: &mut G) -> Option<Vec<Elem>> {
    let mut x = space.particular()?.to_vec();
    for g in space.generators() {
        let c = elem(ring, rng);
        for (xi, &gi) in x.iter_mut().zip(&g.vector) {
            *xi = ring.add(*xi, ring.mul(c, gi));
        }
    }
    Some(x)
}

/// A commuting square `(φ₁, φ₂)` between two random members, with `φ₁` random
/// and `φ₂` a random solution of `φ₂·α₁ = β₁·φ₁`. Returns the rows and the square.
pub fn commuting_square<G: Rng + ?Sized>(
    ring: RingSpec,
    n: usize,
    max_rank: usize,
    rng: &mut G,
) -> (NSigmaSequence, NSigmaSequence, Matrix, Matrix) {
    loop {
        let a = member(ring, n, max_rank, rng);
        let b = member(ring, n, max_rank, rng);
        let phi1 = matrix(ring, b.rank(0), a.rank(0), rng);
        let mut sys = crate::solve::MatrixSystem::new(ring);
        let v = sys.add_var(b.rank(1), a.rank(1));
        sys.add_equation(&[crate::solve::Term::new(v, None, Some(a.map(0)))], &(b.map(0) * &phi1)).expect("conformable");
        let space = sys.solve().expect("conformable");
        if let Some(x) = solution(ring, &space, rng) {
            let phi2 = sys.decode(&x).pop().expect("one unknown");
            return (a, b, phi1, phi2);
        }
    }
}

/// A morphism between random members, from a random square and a random fill-in.
pub fn morphism<G: Rng + ?Sized>(ring: RingSpec, n: usize, max_rank: usize, rng: &mut G) -> SequenceMorphism {
    loop {
        let (a, b, phi1, phi2) = commuting_square(ring, n, max_rank, rng);
        let space = crate::goodness::fill_in_space(&a, &b, &phi1, &phi2).expect("rows are members");
        let count = space.count();
        if count == 0 {
            continue;
        }
        let k = rng.random_range(0..count.min(1 << 20)) as usize;
        let picked = space.iter().nth(k);
        if let Some(m) = picked {
            return m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angulation::is_n_angle;

    #[test]
    fn generators_respect_their_contracts() {
        let mut rng = seeded(7);
        for ring in [RingSpec::z_mod_p2(2).unwrap(), RingSpec::z_mod_p2(3).unwrap(), RingSpec::dual_numbers(2).unwrap()] {
            for _ in 0..20 {
                assert!(is_n_angle(&member(ring, 4, 2, &mut rng)));
                let c = candidate_with_ranks(ring, &[2, 1, 0, 1], &mut rng);
                assert_eq!(c.ranks(), &[2, 1, 0, 1]);
                assert!(c.is_candidate());
                let (a, b, p1, p2) = commuting_square(ring, 4, 2, &mut rng);
                assert_eq!(&p2 * a.map(0), b.map(0) * &p1);
                assert!(morphism(ring, 4, 1, &mut rng).is_morphism());
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let r = RingSpec::z_mod_p2(3).unwrap();
        let a: Vec<_> = (0..5).map({
            let mut g = seeded(1);
            move |_| candidate(r, 4, 2, &mut g)
        }).collect();
        let b: Vec<_> = (0..5).map({
            let mut g = seeded(1);
            move |_| candidate(r, 4, 2, &mut g)
        }).collect();
        assert_eq!(a, b);
    }
}
