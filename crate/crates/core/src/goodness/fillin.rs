use crate::angulation::is_n_angle;
use crate::error::{Error, Result};
use crate::exec;
use crate::matrix::Matrix;
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::solve::{MatrixSystem, SolutionSpace, Term, Var};

/// All completions `(φ_3, …, φ_n)` of a commuting square `(φ_1, φ_2)`.
pub struct FillInSpace {
    source: NSigmaSequence,
    target: NSigmaSequence,
    fixed: [Matrix; 2],
    system: MatrixSystem,
    space: SolutionSpace,
}

impl FillInSpace {
    pub fn count(&self) -> u128 {
        self.space.count()
    }

    pub fn iter(&self) -> impl Iterator<Item = SequenceMorphism> + '_ {
        self.space.iter().map(|x| self.assemble(&x))
    }

    fn assemble(&self, x: &[crate::ring::Elem]) -> SequenceMorphism {
        let mut components = self.fixed.to_vec();
        components.extend(self.system.decode(x));
        SequenceMorphism::new(self.source.clone(), self.target.clone(), components).expect("fill-in shapes")
    }
}

/// The linear system of the squares `φ_{i+1} α_i = β_i φ_i` for `i ≥ 2`,
/// with `vars[k]` standing for `φ_{k+3}`. Callers may add further equations.
pub(crate) fn fill_in_system(
    a: &NSigmaSequence,
    b: &NSigmaSequence,
    phi1: &Matrix,
    phi2: &Matrix,
) -> Result<(MatrixSystem, Vec<Var>)> {
    if a.n() != b.n() || a.ring() != b.ring() {
        return Err(Error::Shape("rows must share n and ring".into()));
    }
    if phi1.shape() != (b.rank(0), a.rank(0)) || phi2.shape() != (b.rank(1), a.rank(1)) {
        return Err(Error::Shape("given components do not fit the rows".into()));
    }
    if phi2 * a.map(0) != b.map(0) * phi1 {
        return Err(Error::Precondition("the given square does not commute".into()));
    }
    let ring = a.ring();
    let n = a.n();
    let mut system = MatrixSystem::new(ring);
    let vars: Vec<Var> = (2..n).map(|i| system.add_var(b.rank(i), a.rank(i))).collect();
    let minus = ring.neg(ring.one());
    // Position 1 square: φ_3 α_2 = β_2 φ_2.
    system.add_equation(&[Term::new(vars[0], None, Some(a.map(1)))], &(b.map(1) * phi2))?;
    for i in 2..n - 1 {
        system.add_equation(
            &[Term::new(vars[i - 1], None, Some(a.map(i))), Term::new(vars[i - 2], Some(b.map(i)), None).scaled(minus)],
            &Matrix::zeros(ring, b.rank(i + 1), a.rank(i)),
        )?;
    }
    // Wrap square: φ_1 α_n = β_n φ_n.
    system.add_equation(&[Term::new(vars[n - 3], Some(b.map(n - 1)), None)], &(phi1 * a.map(n - 1)))?;
    Ok((system, vars))
}

/// All completions of a commuting square between n-angles.
pub fn fill_in_space(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix) -> Result<FillInSpace> {
    if !is_n_angle(a) || !is_n_angle(b) {
        return Err(Error::Precondition("both rows must be n-angles".into()));
    }
    let (system, _) = fill_in_system(a, b, phi1, phi2)?;
    let space = system.solve()?;
    Ok(FillInSpace { source: a.clone(), target: b.clone(), fixed: [phi1.clone(), phi2.clone()], system, space })
}

impl FillInSpace {
    /// Wraps an already solved system built by [`fill_in_system`].
    pub(crate) fn from_system(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix, system: MatrixSystem) -> Result<Self> {
        let space = system.solve()?;
        Ok(FillInSpace { source: a.clone(), target: b.clone(), fixed: [phi1.clone(), phi2.clone()], system, space })
    }
}

pub fn enumerate_fill_ins(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix, budget: u64) -> Result<Vec<SequenceMorphism>> {
    let space = fill_in_space(a, b, phi1, phi2)?;
    let count = space.count();
    if count > budget as u128 {
        return Err(Error::BudgetExceeded { needed: count, budget });
    }
    Ok(space.iter().collect())
}

const CHUNK: usize = 256;

/// The first fill-in (in enumeration order) whose mapping cone is an n-angle,
/// looking at no more than `budget` fill-ins.
pub fn find_good_fill_in(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix, budget: u64) -> Result<Option<SequenceMorphism>> {
    let space = fill_in_space(a, b, phi1, phi2)?;
    let mut it = space.iter().take(usize::try_from(budget).unwrap_or(usize::MAX));
    loop {
        let chunk: Vec<SequenceMorphism> = it.by_ref().take(CHUNK).collect();
        if chunk.is_empty() {
            return Ok(None);
        }
        if let Some(m) = exec::find_first(&chunk, |m| is_n_angle(&m.cone_unchecked()).then(|| m.clone())) {
            return Ok(Some(m));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Elem, RingSpec};

    fn brute_force(a: &NSigmaSequence, b: &NSigmaSequence, phi1: &Matrix, phi2: &Matrix) -> Vec<Vec<Matrix>> {
        // Rank-1 rows only: scan every tuple of scalars.
        let ring = a.ring();
        let n = a.n();
        let q = ring.order();
        let mut out = Vec::new();
        for code in 0..q.pow((n - 2) as u32) {
            let mut c = code;
            let mut comps = vec![phi1.clone(), phi2.clone()];
            for _ in 2..n {
                comps.push(Matrix::scalar(ring, 1, Elem((c % q) as u8)));
                c /= q;
            }
            let m = SequenceMorphism::new(a.clone(), b.clone(), comps.clone()).unwrap();
            if m.is_morphism() {
                out.push(comps);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force_on_fp() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let one = Matrix::identity(r, 1);
        let mut got: Vec<Vec<Matrix>> =
            enumerate_fill_ins(&f, &f, &one, &one, 1000).unwrap().into_iter().map(|m| m.components().to_vec()).collect();
        got.sort();
        let want = brute_force(&f, &f, &one, &one);
        assert_eq!(got, want);
        // φ_3 and φ_4 must be units: 2·φ_3 = 2 forces φ_3 odd.
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn zero_square_admits_zero_fill_in() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let zero = Matrix::zeros(r, 1, 1);
        let all = enumerate_fill_ins(&f, &f, &zero, &zero, 1000).unwrap();
        assert!(all.iter().any(|m| m.components().iter().all(Matrix::is_zero)));
        assert!(find_good_fill_in(&f, &f, &zero, &zero, 1000).unwrap().is_some());
    }

    #[test]
    fn non_commuting_square_is_rejected() {
        let r = RingSpec::z_mod_p2(2).unwrap();
        let f = NSigmaSequence::f_p_sequence(r, 4, 1).unwrap();
        let g = NSigmaSequence::trivial_gamma(r, 4, 1, 1).unwrap().direct_sum(&NSigmaSequence::trivial_gamma(r, 4, 1, 3).unwrap()).unwrap();
        let one = Matrix::identity(r, 1);
        let zero = Matrix::zeros(r, 1, 1);
        assert!(matches!(fill_in_space(&f, &g, &one, &zero), Err(Error::Precondition(_))));
    }
}
