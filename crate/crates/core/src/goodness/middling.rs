//! Middling goodness: extending a morphism to an `n × n` grid of n-angles.
//!
//! Grid positions are `(i, j)` with `0 ≤ i, j < n`, 0-based. The map
//! `horizontal[i][j]` goes from `(i, j)` to `(i, j+1)` and `vertical[i][j]`
//! from `(i, j)` to `(i+1, j)`, indices taken mod `n` since `Σ` is the
//! identity. Row 0 is the source, row 1 the target and `vertical[0]` the
//! morphism. Every square reads
//! `horizontal[i+1][j]·vertical[i][j] = vertical[i][j+1]·horizontal[i][j]`
//! except the corner `(n−1, n−1)`, where the right side carries `(−1)^n`.
//!
//! The search fixes one representative per isomorphism class of each
//! column (isomorphisms that are the identity on rows 0 and 1 do not
//! change whether a grid exists) and then solves for the horizontal maps
//! column by column.

use std::collections::HashSet;

use serde::Serialize;
use serde_json::{json, Value};

use crate::angulation::{block_shapes, general_linear, general_linear_order, is_n_angle, BlockShape};
use crate::error::{Error, Result};
use crate::exec;
use crate::matrix::Matrix;
use crate::ring::{Elem, RingSpec};
use crate::sequence::{NSigmaSequence, SequenceMorphism};
use crate::smith::{inverse, is_invertible, smith_normal_form};
use crate::solve::{MatrixSystem, SolutionSpace, Term};

use super::{require_angle_morphism, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MiddlingDiagram {
    ring: RingSpec,
    ranks: Vec<Vec<usize>>,
    horizontal: Vec<Vec<Matrix>>,
    vertical: Vec<Vec<Matrix>>,
}

impl MiddlingDiagram {
    /// `ranks[i][j]` is the rank at `(i, j)`; map shapes are checked.
    pub fn new(ring: RingSpec, ranks: Vec<Vec<usize>>, horizontal: Vec<Vec<Matrix>>, vertical: Vec<Vec<Matrix>>) -> Result<Self> {
        let n = ranks.len();
        crate::sequence::check_n(n, ring)?;
        let square = |v: &Vec<Vec<Matrix>>| v.len() == n && v.iter().all(|r| r.len() == n);
        if ranks.iter().any(|r| r.len() != n) || !square(&horizontal) || !square(&vertical) {
            return Err(Error::Shape(format!("a middling diagram for n = {n} needs {n}×{n} grids")));
        }
        for i in 0..n {
            for j in 0..n {
                let h = &horizontal[i][j];
                let v = &vertical[i][j];
                if h.ring() != ring || v.ring() != ring {
                    return Err(Error::RingMismatch(ring, if h.ring() != ring { h.ring() } else { v.ring() }));
                }
                if h.shape() != (ranks[i][(j + 1) % n], ranks[i][j]) || v.shape() != (ranks[(i + 1) % n][j], ranks[i][j]) {
                    return Err(Error::Shape(format!("maps at ({i}, {j}) do not fit the ranks")));
                }
            }
        }
        Ok(MiddlingDiagram { ring, ranks, horizontal, vertical })
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[Vec<usize>] {
        &self.ranks
    }

    pub fn horizontal(&self, i: usize, j: usize) -> &Matrix {
        &self.horizontal[i][j]
    }

    pub fn vertical(&self, i: usize, j: usize) -> &Matrix {
        &self.vertical[i][j]
    }

    pub fn row(&self, i: usize) -> NSigmaSequence {
        NSigmaSequence::from_maps(self.ring, self.ranks[i].clone(), self.horizontal[i].clone())
    }

    pub fn column(&self, j: usize) -> NSigmaSequence {
        let n = self.n();
        NSigmaSequence::from_maps(self.ring, (0..n).map(|i| self.ranks[i][j]).collect(), (0..n).map(|i| self.vertical[i][j].clone()).collect())
    }

    /// The morphism from row 0 to row 1.
    pub fn morphism(&self) -> SequenceMorphism {
        SequenceMorphism::new(self.row(0), self.row(1), self.vertical[0].clone()).expect("grid shapes")
    }

    /// Rows become columns.
    pub fn transpose(&self) -> Self {
        let n = self.n();
        let t = |g: &Vec<Vec<Matrix>>| (0..n).map(|i| (0..n).map(|j| g[j][i].clone()).collect()).collect();
        MiddlingDiagram {
            ring: self.ring,
            ranks: (0..n).map(|i| (0..n).map(|j| self.ranks[j][i]).collect()).collect(),
            horizontal: t(&self.vertical),
            vertical: t(&self.horizontal),
        }
    }

    pub fn to_json(&self) -> Value {
        let grid = |g: &Vec<Vec<Matrix>>| g.iter().map(|r| r.iter().map(Matrix::to_json).collect::<Vec<_>>()).collect::<Vec<_>>();
        json!({
            "ring": self.ring,
            "n": self.n(),
            "ranks": self.ranks,
            "horizontal": grid(&self.horizontal),
            "vertical": grid(&self.vertical),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let field = |k: &str| v.get(k).cloned().ok_or_else(|| Error::Input(format!("diagram is missing `{k}`")));
        let ring: RingSpec = serde_json::from_value(field("ring")?).map_err(|e| Error::Input(format!("bad ring: {e}")))?;
        let ranks: Vec<Vec<usize>> = serde_json::from_value(field("ranks")?).map_err(|e| Error::Input(format!("bad ranks: {e}")))?;
        let grid = |k: &str| -> Result<Vec<Vec<Matrix>>> {
            let rows = field(k)?;
            let rows = rows.as_array().ok_or_else(|| Error::Input(format!("`{k}` must be an array")))?;
            rows.iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Input(format!("`{k}` must be an array of arrays")))?
                        .iter()
                        .map(|m| Matrix::from_json(ring, m))
                        .collect()
                })
                .collect()
        };
        Self::new(ring, ranks, grid("horizontal")?, grid("vertical")?)
    }

    fn squares_commute(&self) -> bool {
        let n = self.n();
        let sign = self.ring.sign(n);
        (0..n).all(|i| {
            (0..n).all(|j| {
                let down_then_across = &self.horizontal[(i + 1) % n][j] * &self.vertical[i][j];
                let across_then_down = &self.vertical[i][(j + 1) % n] * &self.horizontal[i][j];
                if i == n - 1 && j == n - 1 {
                    down_then_across == across_then_down.scale(sign)
                } else {
                    down_then_across == across_then_down
                }
            })
        })
    }
}

/// Rows and columns are n-angles and every square commutes, the corner up to `(−1)^n`.
pub fn verify_middling(d: &MiddlingDiagram) -> bool {
    let n = d.n();
    (0..n).all(|i| is_n_angle(&d.row(i)) && is_n_angle(&d.column(i))) && d.squares_commute()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MiddlingOutcome {
    Found(Box<MiddlingDiagram>),
    /// No grid exists with interior ranks within the bound.
    NoneExhaustive,
    /// The node budget ran out first.
    NoneWithinBudget,
}

impl MiddlingOutcome {
    pub fn verdict(&self) -> Verdict {
        match self {
            MiddlingOutcome::Found(_) => Verdict::Found,
            MiddlingOutcome::NoneExhaustive => Verdict::NoneExhaustive,
            MiddlingOutcome::NoneWithinBudget => Verdict::NoneWithinBudget,
        }
    }

    pub fn diagram(&self) -> Option<&MiddlingDiagram> {
        match self {
            MiddlingOutcome::Found(d) => Some(d),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    /// Column representatives across all columns.
    pub column_classes: u64,
    /// Horizontal-map solutions visited.
    pub nodes: u64,
}

/// Searches for a grid extending `phi` with every rank in rows `2..n` at most
/// `rank_bound`, visiting at most `budget` nodes. The outcome does not depend
/// on the number of workers.
pub fn search_middling_extension(phi: &SequenceMorphism, rank_bound: usize, budget: u64) -> Result<(MiddlingOutcome, SearchStats)> {
    require_angle_morphism(phi)?;
    let n = phi.n();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        match column_classes(phi.component(j), n, rank_bound, budget)? {
            Some(c) => cols.push(c),
            None => return Ok((MiddlingOutcome::NoneWithinBudget, SearchStats { column_classes: 0, nodes: budget })),
        }
    }
    let mut stats = SearchStats { column_classes: cols.iter().map(|c| c.len() as u64).sum(), nodes: 0 };
    let ctx = Ctx { phi, n, sign: phi.source().ring().sign(n), cols: &cols };
    let tasks: Vec<(usize, usize)> = (0..cols[0].len()).flat_map(|a| (0..cols[1].len()).map(move |b| (a, b))).collect();
    let mut remaining = budget;
    for chunk in tasks.chunks(TASK_CHUNK) {
        let results = exec::map(chunk, |&(a, b)| ctx.run_task(a, b, budget));
        for r in results {
            if let Some((at, d)) = r.found {
                if at <= remaining {
                    stats.nodes += at;
                    debug_assert!(verify_middling(&d));
                    return Ok((MiddlingOutcome::Found(Box::new(d)), stats));
                }
            }
            if r.exhausted || r.used > remaining {
                stats.nodes = budget;
                return Ok((MiddlingOutcome::NoneWithinBudget, stats));
            }
            remaining -= r.used;
            stats.nodes += r.used;
        }
    }
    Ok((MiddlingOutcome::NoneExhaustive, stats))
}

const TASK_CHUNK: usize = 32;

/// Above this many block automorphisms, coset reduction is skipped.
const COSET_GROUP_CAP: u128 = 1 << 12;

/// One n-angle per isomorphism class (relative to rows 0 and 1) with first
/// map `f` and interior ranks at most `bound`, possibly with repeats.
/// `None` when a stabilizer is larger than `budget`.
fn column_classes(f: &Matrix, n: usize, bound: usize, budget: u64) -> Result<Option<Vec<NSigmaSequence>>> {
    let ring = f.ring();
    let (b, a) = f.shape();
    let snf = smith_normal_form(f);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut interior = vec![0usize; n - 2];
    loop {
        let mut ranks = vec![a, b];
        ranks.extend(&interior);
        for shape in block_shapes(&ranks) {
            let block = shape.build(ring)?;
            let bs = smith_normal_form(block.map(0));
            if bs.diag != snf.diag {
                continue;
            }
            let u1 = &snf.right * &inverse(&bs.right)?;
            let u2 = &inverse(&snf.left)? * &bs.left;
            let Some(reps) = stabilizer_cosets(&block, &shape, budget)? else { return Ok(None) };
            for (s1, s2) in reps {
                let mut w: Vec<Matrix> = block.ranks().iter().map(|&r| Matrix::identity(ring, r)).collect();
                w[0] = &u1 * &s1;
                w[1] = &u2 * &s2;
                let col = block.conjugate(&w)?;
                debug_assert_eq!(col.map(0), f);
                if seen.insert(col.clone()) {
                    out.push(col);
                }
            }
        }
        // Next interior rank vector, last entry fastest.
        let mut k = n - 2;
        loop {
            if k == 0 {
                return Ok(Some(out));
            }
            k -= 1;
            if interior[k] < bound {
                interior[k] += 1;
                interior[k + 1..].iter_mut().for_each(|x| *x = 0);
                break;
            }
        }
    }
}

/// Coset representatives of the pairs `(s₁, s₂)` with `s₂·B = B·s₁` modulo
/// the restriction of the block's diagonal automorphisms to positions 0 and 1.
fn stabilizer_cosets(block: &NSigmaSequence, shape: &BlockShape, budget: u64) -> Result<Option<Vec<(Matrix, Matrix)>>> {
    let ring = block.ring();
    let base = block.map(0);
    let (b, a) = base.shape();
    let mut sys = MatrixSystem::new(ring);
    let s1 = sys.add_var(a, a);
    let s2 = sys.add_var(b, b);
    sys.add_equation(&[Term::new(s2, None, Some(base)), Term::new(s1, Some(base), None).scaled(ring.neg(ring.one()))], &Matrix::zeros(ring, b, a))?;
    let space = sys.solve()?;
    if space.count() > budget as u128 {
        return Ok(None);
    }
    let stab: Vec<(Matrix, Matrix)> = space
        .iter()
        .filter_map(|x| {
            let mut m = sys.decode(&x).into_iter();
            let (x1, x2) = (m.next()?, m.next()?);
            (is_invertible(&x1) && is_invertible(&x2)).then_some((x1, x2))
        })
        .collect();
    let n = block.n();
    let (k1, kn, k2, f) = (shape.gamma[0], shape.gamma[n - 1], shape.gamma[1], shape.f);
    let group_order = general_linear_order(ring, k1)
        .saturating_mul(general_linear_order(ring, kn))
        .saturating_mul(general_linear_order(ring, k2))
        .saturating_mul(general_linear_order(ring, f))
        .saturating_mul((ring.p() as u128).saturating_pow((f * f) as u32));
    if group_order > COSET_GROUP_CAP {
        return Ok(Some(stab));
    }
    let group = diagonal_automorphisms(ring, k1, kn, k2, f);
    let mut covered = HashSet::new();
    let mut reps = Vec::new();
    for (x1, x2) in stab {
        if covered.contains(&(x1.clone(), x2.clone())) {
            continue;
        }
        for (h0, h1) in &group {
            covered.insert((&x1 * h0, &x2 * h1));
        }
        reps.push((x1, x2));
    }
    Ok(Some(reps))
}

/// Positions 0 and 1 of the automorphisms of `Γ₁^{k1} ⊕ Γ₂^{k2} ⊕ Γₙ^{kn} ⊕ F(p)^f`
/// that preserve each summand. Bases: `[Γ₁, Γₙ, F]` at 0 and `[Γ₁, Γ₂, F]` at 1.
fn diagonal_automorphisms(ring: RingSpec, k1: usize, kn: usize, k2: usize, f: usize) -> Vec<(Matrix, Matrix)> {
    let g1 = general_linear(ring, k1);
    let gn = general_linear(ring, kn);
    let g2 = general_linear(ring, k2);
    let gf = general_linear(ring, f);
    let p = ring.uniformizer();
    // p·X depends only on the residues of X.
    let shifts: Vec<Matrix> = residue_matrices(ring, f).into_iter().map(|x| x.scale(p)).collect();
    let mut out = Vec::new();
    for a in &g1 {
        for c in &gn {
            for d in &g2 {
                for z in &gf {
                    for s in &shifts {
                        let at0 = a.direct_sum(c).direct_sum(z);
                        let z1 = z.try_add(s).expect("same shape");
                        let at1 = a.direct_sum(d).direct_sum(&z1);
                        out.push((at0, at1));
                    }
                }
            }
        }
    }
    out
}

/// Every `f × f` matrix with entries in `{0, …, p−1}` as residue lifts.
fn residue_matrices(ring: RingSpec, f: usize) -> Vec<Matrix> {
    let p = ring.p() as usize;
    let cells = f * f;
    let total = p.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            Matrix::from_fn(ring, f, f, |_, _| {
                let r = (code % p) as u8;
                code /= p;
                ring.from_parts(r, 0)
            })
        })
        .collect()
}

struct Ctx<'a> {
    phi: &'a SequenceMorphism,
    n: usize,
    sign: Elem,
    cols: &'a [Vec<NSigmaSequence>],
}

struct TaskResult {
    found: Option<(u64, MiddlingDiagram)>,
    used: u64,
    exhausted: bool,
}

struct OutOfBudget;

struct Counter {
    used: u64,
    cap: u64,
}

impl Counter {
    fn visit(&mut self) -> std::result::Result<(), OutOfBudget> {
        if self.used == self.cap {
            return Err(OutOfBudget);
        }
        self.used += 1;
        Ok(())
    }
}

/// Horizontal maps between two columns: rows `0..n`, the first two fixed.
type Step = Vec<Matrix>;

struct StepSpace {
    fixed: [Matrix; 2],
    sys: MatrixSystem,
    space: SolutionSpace,
}

impl StepSpace {
    fn step(&self, sol: &[Elem]) -> Step {
        let mut step = self.fixed.to_vec();
        step.extend(self.sys.decode(sol));
        step
    }
}

impl Ctx<'_> {
    fn run_task(&self, a: usize, b: usize, cap: u64) -> TaskResult {
        let mut counter = Counter { used: 0, cap };
        let mut chosen = vec![&self.cols[0][a], &self.cols[1][b]];
        let mut steps = Vec::with_capacity(self.n);
        match self.extend(&mut chosen, &mut steps, &mut counter) {
            Ok(Some(d)) => TaskResult { found: Some((counter.used, d)), used: counter.used, exhausted: false },
            Ok(None) => TaskResult { found: None, used: counter.used, exhausted: false },
            Err(OutOfBudget) => TaskResult { found: None, used: counter.used, exhausted: true },
        }
    }

    /// `chosen` holds columns `0..=k`, `steps` the maps between them (`k` of them).
    fn extend<'c>(
        &'c self,
        chosen: &mut Vec<&'c NSigmaSequence>,
        steps: &mut Vec<Step>,
        counter: &mut Counter,
    ) -> std::result::Result<Option<MiddlingDiagram>, OutOfBudget> {
        let n = self.n;
        let k = chosen.len() - 1;
        if steps.len() < k {
            // Maps from column k−1 to column k.
            let j = k - 1;
            let Some(space) = self.step_space(chosen[j], chosen[k], j, steps.last(), None) else { return Ok(None) };
            for sol in space.space.iter() {
                counter.visit()?;
                let h = space.step(&sol);
                if !self.exact_between(steps.last(), &h) {
                    continue;
                }
                steps.push(h);
                let r = self.extend(chosen, steps, counter)?;
                steps.pop();
                if r.is_some() {
                    return Ok(r);
                }
            }
            return Ok(None);
        }
        if k == n - 1 {
            let Some(space) = self.step_space(chosen[k], chosen[0], k, steps.last(), Some(&steps[0])) else { return Ok(None) };
            for sol in space.space.iter() {
                counter.visit()?;
                let h = space.step(&sol);
                if !self.exact_between(steps.last(), &h) || !self.exact_between(Some(&h), &steps[0]) {
                    continue;
                }
                steps.push(h);
                let d = self.leaf(chosen, steps);
                steps.pop();
                if d.is_some() {
                    return Ok(d);
                }
            }
            return Ok(None);
        }
        for col in &self.cols[k + 1] {
            chosen.push(col);
            let r = self.extend(chosen, steps, counter)?;
            chosen.pop();
            if r.is_some() {
                return Ok(r);
            }
        }
        Ok(None)
    }

    /// Every `Step` from column `x` (index `j`) to column `y` making the
    /// squares commute and composing to zero with its neighbours in each row.
    fn step_space(
        &self,
        x: &NSigmaSequence,
        y: &NSigmaSequence,
        j: usize,
        prev: Option<&Step>,
        next: Option<&Step>,
    ) -> Option<StepSpace> {
        let n = self.n;
        let ring = x.ring();
        let alpha = self.phi.source().map(j).clone();
        let beta = self.phi.target().map(j).clone();
        let mut sys = MatrixSystem::new(ring);
        let vars: Vec<_> = (2..n).map(|i| sys.add_var(y.rank(i), x.rank(i))).collect();
        let var = |i: usize| vars[i - 2];
        let minus = ring.neg(ring.one());
        let ok = (|| -> Result<()> {
            sys.add_equation(&[Term::new(var(2), None, Some(x.map(1)))], &(y.map(1) * &beta))?;
            for i in 2..n - 1 {
                sys.add_equation(
                    &[Term::new(var(i + 1), None, Some(x.map(i))), Term::new(var(i), Some(y.map(i)), None).scaled(minus)],
                    &Matrix::zeros(ring, y.rank(i + 1), x.rank(i)),
                )?;
            }
            let wrap = if j == n - 1 { self.sign } else { ring.one() };
            sys.add_equation(&[Term::new(var(n - 1), Some(y.map(n - 1)), None).scaled(wrap)], &(&alpha * x.map(n - 1)))?;
            if let Some(prev) = prev {
                for (i, h) in prev.iter().enumerate().take(n).skip(2) {
                    sys.add_equation(&[Term::new(var(i), None, Some(h))], &Matrix::zeros(ring, y.rank(i), h.cols()))?;
                }
            }
            if let Some(next) = next {
                for (i, h) in next.iter().enumerate().take(n).skip(2) {
                    sys.add_equation(&[Term::new(var(i), Some(h), None)], &Matrix::zeros(ring, h.rows(), x.rank(i)))?;
                }
            }
            Ok(())
        })();
        ok.expect("step equations are conformable");
        let space = sys.solve().expect("conformable system");
        if space.is_empty() {
            return None;
        }
        Some(StepSpace { fixed: [alpha, beta], sys, space })
    }

    /// Rows `2..n` are exact at the column between `prev` and `h`.
    fn exact_between(&self, prev: Option<&Step>, h: &Step) -> bool {
        let Some(prev) = prev else { return true };
        (2..self.n).all(|i| smith_normal_form(&prev[i]).log_image() == smith_normal_form(&h[i]).log_kernel())
    }

    fn leaf(&self, chosen: &[&NSigmaSequence], steps: &[Step]) -> Option<MiddlingDiagram> {
        let n = self.n;
        let ring = self.phi.source().ring();
        let ranks: Vec<Vec<usize>> = (0..n).map(|i| (0..n).map(|j| chosen[j].rank(i)).collect()).collect();
        let horizontal: Vec<Vec<Matrix>> = (0..n).map(|i| (0..n).map(|j| steps[j][i].clone()).collect()).collect();
        for i in 2..n {
            if !is_n_angle(&NSigmaSequence::from_maps(ring, ranks[i].clone(), horizontal[i].clone())) {
                return None;
            }
        }
        let vertical = (0..n).map(|i| (0..n).map(|j| chosen[j].map(i).clone()).collect()).collect();
        let d = MiddlingDiagram::new(ring, ranks, horizontal, vertical).expect("grid shapes");
        verify_middling(&d).then_some(d)
    }
}
