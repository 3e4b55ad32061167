//! H-polyhedra and an exact, certificate-producing LP solver.
//!
//! `lp_maximize` solves `max c·x s.t. A x <= b` (x free) by running a two-phase
//! Bland-rule simplex on the dual standard form `min b·y s.t. Aᵀ y = c, y >= 0`.
//! The dual tableau has one row per primal variable, which keeps the small-`d`
//! LPs issued by the enumeration algorithms cheap. Every outcome carries an
//! exact certificate:
//!
//! - `Optimal`: primal point and dual multipliers with equal objective,
//! - `Unbounded`: feasible point and ray `r` with `A r <= 0`, `c·r > 0`,
//! - `Infeasible`: Farkas vector `y >= 0` with `yᵀA = 0`, `yᵀb < 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, dot, zeros, RMatrix, RVector};
use crate::rational::Rational;

/// The set `{x : A x <= b}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PolyhedronJson", into = "PolyhedronJson")]
pub struct Polyhedron {
    a: RMatrix,
    b: RVector,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyhedronJson {
    #[serde(rename = "A")]
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    /// Needed only when `A` has no rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
}

impl TryFrom<PolyhedronJson> for Polyhedron {
    type Error = Error;

    fn try_from(j: PolyhedronJson) -> Result<Self> {
        let dim = match (j.a.first(), j.dim) {
            (Some(r), Some(d)) => {
                check_dim(d, r.len())?;
                d
            }
            (Some(r), None) => r.len(),
            (None, Some(d)) => d,
            (None, None) => 0,
        };
        Polyhedron::new(RMatrix::from_rows(j.a, dim)?, j.b)
    }
}

impl From<Polyhedron> for PolyhedronJson {
    fn from(p: Polyhedron) -> Self {
        let dim = (p.a.nrows() == 0).then_some(p.dim());
        PolyhedronJson { a: p.a.to_rows(), b: p.b, dim }
    }
}

impl Polyhedron {
    pub fn new(a: RMatrix, b: RVector) -> Result<Self> {
        check_dim(a.nrows(), b.len())?;
        Ok(Polyhedron { a, b })
    }

    /// All of `R^dim`.
    pub fn universe(dim: usize) -> Self {
        Polyhedron { a: RMatrix::zeros(0, dim), b: vec![] }
    }

    /// The axis-aligned box `lo <= x <= hi`.
    pub fn from_box(lo: &[Rational], hi: &[Rational]) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        let d = lo.len();
        let mut p = Self::universe(d);
        for i in 0..d {
            let mut row = zeros(d);
            row[i] = Rational::one();
            p.push(row.clone(), hi[i].clone())?;
            row[i] = -Rational::one();
            p.push(row, -&lo[i])?;
        }
        Ok(p)
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: Rational, hi: Rational) -> Self {
        Self::from_box(&vec![lo; dim], &vec![hi; dim]).expect("matching dimensions")
    }

    /// The unit ball of the L1 norm, `{x : Σ|x_i| <= 1}`, as `2^dim` inequalities.
    pub fn cross_polytope(dim: usize) -> Self {
        let mut p = Self::universe(dim);
        for mask in 0u64..(1u64 << dim) {
            let row = (0..dim)
                .map(|i| if mask >> i & 1 == 1 { -Rational::one() } else { Rational::one() })
                .collect();
            p.push(row, Rational::one()).expect("row has ambient dimension");
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.b
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&[Rational], &Rational)> {
        self.a.rows().zip(&self.b)
    }

    /// Appends the constraint `row · x <= rhs`.
    pub fn push(&mut self, row: RVector, rhs: Rational) -> Result<()> {
        self.a.push_row(row)?;
        self.b.push(rhs);
        Ok(())
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        check_dim(self.dim(), other.dim())?;
        let mut p = self.clone();
        for (row, rhs) in other.constraints() {
            p.push(row.to_vec(), rhs.clone())?;
        }
        Ok(p)
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.constraints().all(|(row, rhs)| dot(row, x) <= *rhs)
    }

    /// Every inequality holds strictly at `x`.
    pub fn contains_strictly(&self, x: &[Rational]) -> bool {
        x.len() == self.dim() && self.constraints().all(|(row, rhs)| dot(row, x) < *rhs)
    }

    pub fn is_empty(&self) -> bool {
        matches!(
            lp_maximize(&zeros(self.dim()), self).expect("objective has ambient dimension"),
            LpResult::Infeasible { .. }
        )
    }

    /// A point satisfying every inequality strictly, if one exists. The
    /// point maximizes the smallest slack (capped at 1).
    pub fn interior_point(&self) -> Option<RVector> {
        let d = self.dim();
        let mut lifted = Polyhedron::universe(d + 1);
        for (row, rhs) in self.constraints() {
            let mut r = row.to_vec();
            r.push(Rational::one());
            lifted.push(r, rhs.clone()).expect("lifted row");
        }
        let mut cap = zeros(d + 1);
        cap[d] = Rational::one();
        lifted.push(cap.clone(), Rational::one()).expect("lifted row");
        match lp_maximize(&cap, &lifted).expect("objective has ambient dimension") {
            LpResult::Optimal { value, mut point, .. } if value.is_positive() => {
                point.truncate(d);
                Some(point)
            }
            _ => None,
        }
    }

    /// Image under `x -> x + t`.
    pub fn translate(&self, t: &[Rational]) -> Polyhedron {
        let b = self.constraints().map(|(row, rhs)| rhs + dot(row, t)).collect();
        Polyhedron { a: self.a.clone(), b }
    }
}

/// Outcome of `lp_maximize`, with exact certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { value: Rational, point: RVector, dual: RVector },
    Unbounded { point: RVector, ray: RVector },
    Infeasible { farkas: RVector },
}

impl LpResult {
    /// Re-checks the attached certificate against the problem data.
    pub fn verify(&self, objective: &[Rational], p: &Polyhedron) -> bool {
        let aty = |y: &[Rational]| p.matrix().vec_mul(y);
        let nonneg = |y: &[Rational]| y.iter().all(|v| !v.is_negative());
        match self {
            LpResult::Optimal { value, point, dual } => {
                dual.len() == p.num_constraints()
                    && p.contains(point)
                    && dot(objective, point) == *value
                    && nonneg(dual)
                    && aty(dual) == objective
                    && dot(p.rhs(), dual) == *value
            }
            LpResult::Unbounded { point, ray } => {
                p.contains(point)
                    && p.matrix().rows().all(|r| !dot(r, ray).is_positive())
                    && dot(objective, ray).is_positive()
            }
            LpResult::Infeasible { farkas } => {
                farkas.len() == p.num_constraints()
                    && nonneg(farkas)
                    && aty(farkas).iter().all(Rational::is_zero)
                    && dot(p.rhs(), farkas).is_negative()
            }
        }
    }

    pub fn is_optimal(&self) -> bool {
        matches!(self, LpResult::Optimal { .. })
    }
}

/// Exact `max objective·x s.t. x ∈ p`.
pub fn lp_maximize(objective: &[Rational], p: &Polyhedron) -> Result<LpResult> {
    check_dim(p.dim(), objective.len())?;
    let m = p.num_constraints();
    if p.dim() == 0 {
        // 0 <= b_i for every row
        return Ok(match p.rhs().iter().position(Rational::is_negative) {
            Some(i) => {
                let mut farkas = zeros(m);
                farkas[i] = Rational::one();
                LpResult::Infeasible { farkas }
            }
            None => LpResult::Optimal { value: Rational::zero(), point: vec![], dual: zeros(m) },
        });
    }
    let result = match solve_dual(p, objective) {
        DualOutcome::Optimal { y, x } => LpResult::Optimal { value: dot(p.rhs(), &y), point: x, dual: y },
        DualOutcome::Unbounded { direction } => LpResult::Infeasible { farkas: direction },
        DualOutcome::Infeasible { ray } => match solve_dual(p, &zeros(p.dim())) {
            DualOutcome::Optimal { x, .. } => LpResult::Unbounded { point: x, ray },
            DualOutcome::Unbounded { direction } => LpResult::Infeasible { farkas: direction },
            DualOutcome::Infeasible { .. } => unreachable!("y = 0 is dual feasible for c = 0"),
        },
    };
    debug_assert!(result.verify(objective, p), "LP certificate failed to verify");
    Ok(result)
}

enum DualOutcome {
    /// dual optimum `y` and primal optimum `x` (the simplex multipliers)
    Optimal { y: RVector, x: RVector },
    /// `Aᵀy = c, y >= 0` is infeasible; `ray` has `A ray <= 0`, `c·ray > 0`
    Infeasible { ray: RVector },
    /// improving dual direction; a Farkas certificate for the primal
    Unbounded { direction: RVector },
}

/// Dense simplex tableau for `min cost·y s.t. M y = rhs, y >= 0` with
/// `rows` equality rows, `m` structural columns and `rows` artificial columns.
struct Tableau {
    m: usize,
    width: usize,
    t: Vec<RVector>,
    obj: RVector,
    basis: Vec<usize>,
}

enum Step {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.t[pr][pc].recip();
        for v in self.t[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let nz: Vec<usize> = (0..=self.width).filter(|&j| !self.t[pr][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.t[pr]);
        for (r, row) in self.t.iter_mut().enumerate() {
            if r == pr || row[pc].is_zero() {
                continue;
            }
            let f = row[pc].clone();
            for &j in &nz {
                let v = &f * &pivot_row[j];
                row[j] -= v;
            }
        }
        if !self.obj[pc].is_zero() {
            let f = self.obj[pc].clone();
            for &j in &nz {
                let v = &f * &pivot_row[j];
                self.obj[j] -= v;
            }
        }
        self.t[pr] = pivot_row;
        self.basis[pr] = pc;
    }

    /// Bland's rule: lowest-index improving column, lowest-index leaving
    /// basic variable among ratio-test ties. Only structural columns enter.
    fn run(&mut self) -> Step {
        loop {
            let Some(pc) = (0..self.m).find(|&j| self.obj[j].is_negative()) else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (r, row) in self.t.iter().enumerate() {
                if !row[pc].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[pc];
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return Step::Unbounded(pc),
            }
        }
    }

    fn set_costs(&mut self, cost: &[Rational]) {
        let mut obj = RVector::with_capacity(self.width + 1);
        obj.extend_from_slice(cost);
        obj.push(Rational::zero());
        for (row, &b) in self.t.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(row) {
                if !v.is_zero() {
                    *o -= cb * v;
                }
            }
        }
        self.obj = obj;
    }
}

fn solve_dual(p: &Polyhedron, c: &[Rational]) -> DualOutcome {
    let d = p.dim();
    let m = p.num_constraints();
    let width = m + d;
    let flip: Vec<bool> = c.iter().map(Rational::is_negative).collect();
    let mut t = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = RVector::with_capacity(width + 1);
        for j in 0..m {
            let v = p.matrix().get(j, i);
            row.push(if flip[i] { -v } else { v.clone() });
        }
        for k in 0..d {
            row.push(if k == i { Rational::one() } else { Rational::zero() });
        }
        row.push(c[i].abs());
        t.push(row);
    }
    let mut tab = Tableau { m, width, t, obj: vec![], basis: (m..m + d).collect() };

    // phase 1: minimise the sum of artificials
    let mut phase1 = zeros(width);
    for v in &mut phase1[m..] {
        *v = Rational::one();
    }
    tab.set_costs(&phase1);
    if let Step::Unbounded(_) = tab.run() {
        unreachable!("phase 1 objective is bounded below by 0");
    }
    if tab.obj[width].is_negative() {
        // multipliers π_i = 1 - r_{m+i} certify infeasibility
        let ray = (0..d)
            .map(|i| {
                let pi = Rational::one() - &tab.obj[m + i];
                if flip[i] {
                    -pi
                } else {
                    pi
                }
            })
            .collect();
        return DualOutcome::Infeasible { ray };
    }

    // drive zero-level artificials out of the basis where possible
    for r in 0..d {
        if tab.basis[r] >= m {
            if let Some(j) = (0..m).find(|&j| !tab.t[r][j].is_zero()) {
                tab.pivot(r, j);
            }
        }
    }

    let mut phase2 = zeros(width);
    phase2[..m].clone_from_slice(p.rhs());
    tab.set_costs(&phase2);
    match tab.run() {
        Step::Unbounded(pc) => {
            let mut direction = zeros(m);
            direction[pc] = Rational::one();
            for (row, &b) in tab.t.iter().zip(&tab.basis) {
                if b < m {
                    direction[b] = -&row[pc];
                } else {
                    debug_assert!(row[pc].is_zero());
                }
            }
            DualOutcome::Unbounded { direction }
        }
        Step::Optimal => {
            let mut y = zeros(m);
            for (row, &b) in tab.t.iter().zip(&tab.basis) {
                if b < m {
                    y[b] = row[width].clone();
                }
            }
            let x = (0..d)
                .map(|i| {
                    let pi = -&tab.obj[m + i];
                    if flip[i] {
                        -pi
                    } else {
                        pi
                    }
                })
                .collect();
            DualOutcome::Optimal { y, x }
        }
    }
}
