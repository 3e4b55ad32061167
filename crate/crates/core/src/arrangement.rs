//! Hyperplane arrangements and exact enumeration of their full-dimensional
//! cells.
//!
//! Cells are built incrementally. Adding a hyperplane `h` splits exactly the
//! cells that meet `h`, and those are in bijection with the cells of the
//! earlier hyperplanes restricted to `h`, one dimension lower. Each split cell
//! gets two witnesses `p ± δ·normal(h)` where `p` is a witness of the
//! restricted cell, and `δ` is small enough that no other hyperplane is
//! crossed. No LPs are needed and every witness is exact.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::linalg::{axpy, check_dim, dot, is_zero_vec, neg, norm_l1, zeros, RMatrix, RVector};
use crate::lp::Polyhedron;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    fn from_bool(plus: bool) -> Sign {
        if plus {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// `{x : normal·x = offset}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: RVector,
    pub offset: Rational,
}

impl Hyperplane {
    pub fn new(normal: RVector, offset: Rational) -> Result<Self> {
        if is_zero_vec(&normal) {
            return input("hyperplane normal must be nonzero");
        }
        Ok(Hyperplane { normal, offset })
    }

    /// `normal·x − offset`
    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) - &self.offset
    }

    /// Strict side of `x`, or `None` if `x` lies on the hyperplane.
    pub fn side(&self, x: &[Rational]) -> Option<Sign> {
        match self.eval(x).signum() {
            0 => None,
            s => Some(Sign::from_bool(s > 0)),
        }
    }

    /// Scale-invariant key: normal and offset divided by the first nonzero
    /// normal entry, so parallel copies (of either orientation) coincide.
    fn canonical(&self) -> (RVector, Rational, bool) {
        let lead = self.normal.iter().find(|v| !v.is_zero()).expect("nonzero normal").clone();
        let normal = self.normal.iter().map(|v| v / &lead).collect();
        (normal, &self.offset / &lead, lead.is_negative())
    }
}

/// A full-dimensional cell: one strict sign per deduplicated hyperplane and
/// a witness strictly inside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub signs: Vec<Sign>,
    pub witness: RVector,
}

#[derive(Clone, Debug)]
pub struct Arrangement {
    dim: usize,
    planes: Vec<Hyperplane>,
    /// original index -> (deduplicated index, orientation reversed)
    index: Vec<(usize, bool)>,
}

impl Arrangement {
    /// Collapses duplicate hyperplanes (equal up to nonzero scaling).
    pub fn new(dim: usize, hyperplanes: Vec<Hyperplane>) -> Result<Self> {
        let mut planes: Vec<Hyperplane> = Vec::new();
        let mut keys: HashMap<(RVector, Rational), (usize, bool)> = HashMap::new();
        let mut index = Vec::with_capacity(hyperplanes.len());
        for h in hyperplanes {
            check_dim(dim, h.normal.len())?;
            if is_zero_vec(&h.normal) {
                return input("hyperplane normal must be nonzero");
            }
            let (n, o, neg_lead) = h.canonical();
            let entry = *keys.entry((n, o)).or_insert_with(|| {
                planes.push(h);
                (planes.len() - 1, neg_lead)
            });
            index.push((entry.0, entry.1 != neg_lead));
        }
        Ok(Arrangement { dim, planes, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The deduplicated hyperplanes that sign vectors refer to.
    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.planes
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn original_len(&self) -> usize {
        self.index.len()
    }

    /// Deduplicated index of an original hyperplane, and whether its
    /// orientation is reversed relative to the stored representative.
    pub fn index_of(&self, original: usize) -> (usize, bool) {
        self.index[original]
    }

    /// Side of an original hyperplane on which a cell with `signs` lies.
    pub fn original_sign(&self, signs: &[Sign], original: usize) -> Sign {
        let (i, flipped) = self.index[original];
        if flipped {
            signs[i].flip()
        } else {
            signs[i]
        }
    }

    /// Sign vector of `x`, or `None` if `x` lies on some hyperplane.
    pub fn locate(&self, x: &[Rational]) -> Option<Vec<Sign>> {
        self.planes.iter().map(|h| h.side(x)).collect()
    }

    /// Every full-dimensional cell exactly once, sorted by sign vector.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells: Vec<Cell> = if self.is_central() && self.dim >= 2 {
            self.central_cells()
        } else {
            let planes: Vec<Plane> = self.planes.iter().map(Plane::from).collect();
            enumerate(self.dim, &planes)
                .into_iter()
                .map(|(key, witness)| Cell { signs: key.into_iter().map(Sign::from_bool).collect(), witness })
                .collect()
        };
        cells.sort_by(|a, b| a.signs.cmp(&b.signs));
        cells
    }

    /// All hyperplanes pass through the origin.
    pub fn is_central(&self) -> bool {
        self.planes.iter().all(|h| h.offset.is_zero())
    }

    /// Every open cone meets `x_last = 1` or `x_last = -1`, so the cells are
    /// those of the two affine slices, merged by sign vector.
    fn central_cells(&self) -> Vec<Cell> {
        let last = self.dim - 1;
        let mut found: HashMap<Vec<Sign>, RVector> = HashMap::new();
        for s in [Rational::one(), -Rational::one()] {
            let slice: Vec<Plane> = self
                .planes
                .iter()
                .filter(|h| !is_zero_vec(&h.normal[..last]))
                .map(|h| Plane::new(h.normal[..last].to_vec(), -(&h.normal[last] * &s)))
                .collect();
            let mut seen_slice: HashSet<(RVector, Rational)> = HashSet::new();
            let slice: Vec<Plane> = slice
                .into_iter()
                .filter(|p| {
                    let (n, o, _) = Hyperplane { normal: p.normal.clone(), offset: p.offset.clone() }.canonical();
                    seen_slice.insert((n, o))
                })
                .collect();
            for (_, mut u) in enumerate(last, &slice) {
                u.push(s.clone());
                let signs = self.locate(&u).expect("slice witness is off every hyperplane");
                found.entry(signs).or_insert(u);
            }
        }
        found.into_iter().map(|(signs, witness)| Cell { signs, witness }).collect()
    }

    /// Closed H-representation of the region with the given signs.
    pub fn restrict_to_cell(&self, signs: &[Sign]) -> Result<Polyhedron> {
        check_dim(self.planes.len(), signs.len())?;
        let mut rows = Vec::with_capacity(signs.len());
        let mut rhs = Vec::with_capacity(signs.len());
        for (h, s) in self.planes.iter().zip(signs) {
            match s {
                Sign::Minus => {
                    rows.push(h.normal.clone());
                    rhs.push(h.offset.clone());
                }
                Sign::Plus => {
                    rows.push(neg(&h.normal));
                    rhs.push(-&h.offset);
                }
            }
        }
        Polyhedron::new(RMatrix::from_rows(rows, self.dim)?, rhs)
    }
}

#[derive(Clone, Debug)]
struct Plane {
    normal: RVector,
    offset: Rational,
    l1: Rational,
}

impl From<&Hyperplane> for Plane {
    fn from(h: &Hyperplane) -> Self {
        Plane::new(h.normal.clone(), h.offset.clone())
    }
}

impl Plane {
    fn new(normal: RVector, offset: Rational) -> Self {
        let l1 = norm_l1(&normal);
        Plane { normal, offset, l1 }
    }

    fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x) - &self.offset
    }
}

/// A rational in `(0, bound)`, chosen with a small denominator; `1` when
/// there is no bound.
pub fn step_below(bound: Option<&Rational>) -> Rational {
    match bound {
        Some(m) if *m <= Rational::one() => {
            let inv = m.recip();
            Rational::from_bigints(num_traits::One::one(), inv.floor() + 1)
        }
        _ => Rational::one(),
    }
}

/// Largest admissible step bound: the minimum over planes with `g·dir ≠ 0`
/// of `|g(p)| / |g·dir|`. Every `t` with `|t|` below it keeps `p + t·dir` on
/// the same strict side of all those planes.
fn step_bound<'a>(p_values: impl Iterator<Item = (&'a Plane, &'a Rational)>, dir: &[Rational]) -> Option<Rational> {
    let mut best: Option<Rational> = None;
    for (g, gp) in p_values {
        let gd = dot(&g.normal, dir);
        if gd.is_zero() {
            continue;
        }
        let r = (gp / gd).abs();
        if best.as_ref().is_none_or(|b| r < *b) {
            best = Some(r);
        }
    }
    best
}

/// Cells of the arrangement in `R^dim` as (sign key, witness). Planes must
/// be pairwise non-identical with nonzero normals.
fn enumerate(dim: usize, planes: &[Plane]) -> Vec<(Vec<bool>, RVector)> {
    if dim == 1 {
        return enumerate_line(planes);
    }
    let mut cells: Vec<(Vec<bool>, RVector)> = vec![(Vec::new(), zeros(dim))];
    for (j, h) in planes.iter().enumerate() {
        let earlier = &planes[..j];
        let mut next: Vec<(Vec<bool>, RVector)> = Vec::with_capacity(cells.len() * 2);
        let mut seen: HashSet<Vec<bool>> = HashSet::with_capacity(cells.len() * 2);
        for (mut key, w) in cells {
            let v = h.eval(&w);
            if v.is_zero() {
                continue;
            }
            key.push(v.is_positive());
            seen.insert(key.clone());
            next.push((key, w));
        }
        let (restricted, lift) = restrict(h, earlier);
        for u in witnesses(dim - 1, &restricted) {
            let p = lift.apply(&u);
            let values: Vec<Rational> = earlier.iter().map(|g| g.eval(&p)).collect();
            let delta = step_below(step_bound(earlier.iter().zip(&values), &h.normal).as_ref());
            let mut key: Vec<bool> = values.iter().map(Rational::is_positive).collect();
            // moving along +normal makes h positive
            for plus in [false, true] {
                key.push(plus);
                if !seen.contains(&key) {
                    let t = if plus { delta.clone() } else { -&delta };
                    let w = axpy(&p, &t, &h.normal);
                    let w = simplify(w, earlier.iter().chain([h]));
                    seen.insert(key.clone());
                    next.push((key.clone(), w));
                }
                key.pop();
            }
        }
        cells = next;
    }
    cells
}

/// Witness entries up to this height are left alone.
const SMALL_ENTRY: i64 = 1 << 20;

/// A point with small entries in the same open cell as `w`: every
/// coordinate moves to the simplest rational within `ρ = min |g(w)| / ‖g‖_1`,
/// which cannot change the sign of any plane.
fn simplify<'a>(w: RVector, planes: impl Iterator<Item = &'a Plane>) -> RVector {
    if w.iter().all(|x| x.is_small(SMALL_ENTRY)) {
        return w;
    }
    let mut rho: Option<Rational> = None;
    for g in planes {
        let r = g.eval(&w).abs() / &g.l1;
        if rho.as_ref().is_none_or(|b| r < *b) {
            rho = Some(r);
        }
    }
    let rho = rho.unwrap_or_else(Rational::one);
    w.iter().map(|x| Rational::simplest_between(&(x - &rho), &(x + &rho))).collect()
}

fn witnesses(dim: usize, planes: &[Plane]) -> Vec<RVector> {
    if dim == 0 {
        return vec![vec![]];
    }
    enumerate(dim, planes).into_iter().map(|(_, w)| w).collect()
}

/// One-dimensional case: the sorted distinct points cut the line into
/// intervals; witnesses are the simplest rationals inside each interval.
fn enumerate_line(planes: &[Plane]) -> Vec<(Vec<bool>, RVector)> {
    let mut cuts: Vec<Rational> = planes.iter().map(|p| &p.offset / &p.normal[0]).collect();
    cuts.sort();
    cuts.dedup();
    let mut points = Vec::with_capacity(cuts.len() + 1);
    match (cuts.first(), cuts.last()) {
        (Some(lo), Some(hi)) => {
            points.push(Rational::from(lo.ceil()) - Rational::one());
            for w in cuts.windows(2) {
                points.push(Rational::simplest_between(&w[0], &w[1]));
            }
            points.push(Rational::from(hi.floor()) + Rational::one());
        }
        _ => points.push(Rational::zero()),
    }
    points
        .into_iter()
        .map(|x| {
            let w = vec![x];
            (planes.iter().map(|p| p.eval(&w).is_positive()).collect(), w)
        })
        .collect()
}

/// Parameterisation of a hyperplane by all coordinates except `pivot`.
struct Lift {
    pivot: usize,
    normal: RVector,
    offset: Rational,
}

impl Lift {
    fn apply(&self, u: &[Rational]) -> RVector {
        let d = self.normal.len();
        let mut x = Vec::with_capacity(d);
        x.extend_from_slice(&u[..self.pivot]);
        x.push(Rational::zero());
        x.extend_from_slice(&u[self.pivot..]);
        let rest = dot(&self.normal, &x);
        x[self.pivot] = (&self.offset - rest) / &self.normal[self.pivot];
        x
    }
}

/// Intersections of `others` with `h`, expressed in the coordinates of
/// `h`'s parameterisation and deduplicated. Parallel planes are dropped:
/// they either miss `h` or (being distinct) never coincide with it.
fn restrict(h: &Plane, others: &[Plane]) -> (Vec<Plane>, Lift) {
    let pivot = h.normal.iter().position(|v| !v.is_zero()).expect("nonzero normal");
    let a_k = &h.normal[pivot];
    let x_k_const = &h.offset / a_k;
    let coeffs: Vec<Rational> = h.normal.iter().map(|v| v / a_k).collect();
    let mut out: Vec<Plane> = Vec::new();
    let mut seen: HashSet<(RVector, Rational)> = HashSet::new();
    for g in others {
        let g_k = &g.normal[pivot];
        let mut normal = Vec::with_capacity(h.normal.len() - 1);
        for (i, gi) in g.normal.iter().enumerate() {
            if i != pivot {
                normal.push(if g_k.is_zero() { gi.clone() } else { gi - g_k * &coeffs[i] });
            }
        }
        if is_zero_vec(&normal) {
            continue;
        }
        let offset = &g.offset - g_k * &x_k_const;
        let plane = Plane::new(normal, offset);
        let (n, o, _) = Hyperplane { normal: plane.normal.clone(), offset: plane.offset.clone() }.canonical();
        if seen.insert((n, o)) {
            out.push(plane);
        }
    }
    let lift = Lift { pivot, normal: h.normal.clone(), offset: h.offset.clone() };
    (out, lift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    fn hp(normal: &[i64], offset: i64) -> Hyperplane {
        Hyperplane::new(normal.iter().map(|&v| qi(v)).collect(), qi(offset)).unwrap()
    }

    fn check_witnesses(arr: &Arrangement, cells: &[Cell]) {
        for c in cells {
            assert_eq!(arr.locate(&c.witness).as_deref(), Some(&c.signs[..]));
        }
        for w in cells.windows(2) {
            assert!(w[0].signs < w[1].signs, "sorted and distinct");
        }
    }

    /// Oracle: try every sign vector and keep those whose open region is
    /// nonempty (LP interior point).
    fn brute_force(arr: &Arrangement) -> Vec<Vec<Sign>> {
        let n = arr.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            let signs: Vec<Sign> = (0..n).map(|i| Sign::from_bool(mask >> (n - 1 - i) & 1 == 1)).collect();
            if arr.restrict_to_cell(&signs).unwrap().interior_point().is_some() {
                out.push(signs);
            }
        }
        out.sort();
        out
    }

    #[test]
    fn empty_arrangement() {
        let arr = Arrangement::new(2, vec![]).unwrap();
        let cells = arr.cells();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].witness.len(), 2);
    }

    #[test]
    fn parallel_points_on_line() {
        let arr = Arrangement::new(1, vec![hp(&[1], 0), hp(&[1], 1)]).unwrap();
        let cells = arr.cells();
        assert_eq!(cells.len(), 3);
        check_witnesses(&arr, &cells);
    }

    #[test]
    fn three_generic_lines() {
        let arr = Arrangement::new(2, vec![hp(&[1, 0], 0), hp(&[0, 1], 0), hp(&[1, 1], 1)]).unwrap();
        let cells = arr.cells();
        assert_eq!(cells.len(), 7);
        check_witnesses(&arr, &cells);
        let sv: Vec<_> = cells.iter().map(|c| c.signs.clone()).collect();
        assert_eq!(sv, brute_force(&arr));
        for c in &cells {
            assert!(arr.restrict_to_cell(&c.signs).unwrap().contains(&c.witness));
        }
    }

    #[test]
    fn duplicates_collapsed() {
        let arr = Arrangement::new(2, vec![hp(&[1, 0], 1), hp(&[-2, 0], -2), hp(&[0, 1], 0), hp(&[3, 0], 3)])
            .unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr.index_of(1), (0, true));
        assert_eq!(arr.index_of(3), (0, false));
        let cells = arr.cells();
        assert_eq!(cells.len(), 4);
        for c in &cells {
            for orig in 0..4 {
                let h = [hp(&[1, 0], 1), hp(&[-2, 0], -2), hp(&[0, 1], 0), hp(&[3, 0], 3)][orig].clone();
                assert_eq!(Some(arr.original_sign(&c.signs, orig)), h.side(&c.witness));
            }
        }
    }

    #[test]
    fn zero_normal_rejected() {
        assert!(Hyperplane::new(vec![qi(0)], qi(1)).is_err());
        let bad = Hyperplane { normal: vec![qi(0), qi(0)], offset: qi(0) };
        assert!(Arrangement::new(2, vec![bad]).is_err());
    }

    #[test]
    fn restrict_examples() {
        let arr = Arrangement::new(1, vec![hp(&[1], 0)]).unwrap();
        let p = arr.restrict_to_cell(&[Sign::Plus]).unwrap();
        assert_eq!(p.matrix().row(0), &[qi(-1)]);
        assert_eq!(p.rhs(), &[qi(0)]);
        // x <= -1 on the plus side of x = 1 is empty
        let arr = Arrangement::new(1, vec![hp(&[1], -1), hp(&[1], 1)]).unwrap();
        assert!(arr.restrict_to_cell(&[Sign::Minus, Sign::Plus]).unwrap().is_empty());
    }

    #[test]
    fn step_choice() {
        assert_eq!(step_below(None), qi(1));
        assert_eq!(step_below(Some(&qi(5))), qi(1));
        assert_eq!(step_below(Some(&q(1, 3))), q(1, 4));
        assert_eq!(step_below(Some(&q(2, 7))), q(1, 4));
        assert_eq!(step_below(Some(&qi(1))), q(1, 2));
    }

    #[test]
    fn central_arrangement_in_3d() {
        // coordinate planes: 8 orthants
        let arr = Arrangement::new(3, vec![hp(&[1, 0, 0], 0), hp(&[0, 1, 0], 0), hp(&[0, 0, 1], 0)]).unwrap();
        assert_eq!(arr.cells().len(), 8);
        // many planes through a common line
        let arr = Arrangement::new(3, vec![hp(&[1, 0, 0], 0), hp(&[1, 1, 0], 0), hp(&[1, 2, 0], 0), hp(&[0, 1, 0], 0)])
            .unwrap();
        let cells = arr.cells();
        assert_eq!(cells.len(), 8);
        check_witnesses(&arr, &cells);
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    fn arb_arrangement(max_n: usize, max_d: usize) -> impl Strategy<Value = Arrangement> {
        (1..=max_d, 0..=max_n).prop_flat_map(|(d, n)| {
            proptest::collection::vec((proptest::collection::vec(-3i64..=3, d), -3i64..=3), n).prop_filter_map(
                "zero normal",
                move |hs| {
                    let planes: Option<Vec<Hyperplane>> =
                        hs.iter().map(|(nv, o)| Hyperplane::new(nv.iter().map(|&v| qi(v)).collect(), qi(*o)).ok()).collect();
                    Arrangement::new(d, planes?).ok()
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn matches_brute_force(arr in arb_arrangement(7, 3)) {
            let cells = arr.cells();
            check_witnesses(&arr, &cells);
            let sv: Vec<_> = cells.iter().map(|c| c.signs.clone()).collect();
            prop_assert_eq!(sv, brute_force(&arr));
        }

        #[test]
        fn random_points_located(arr in arb_arrangement(8, 3), pts in proptest::collection::vec(proptest::collection::vec(-50i64..=50, 3), 20)) {
            let cells = arr.cells();
            for p in pts {
                let x: RVector = p[..arr.dim()].iter().map(|&v| q(v, 7)).collect();
                if let Some(s) = arr.locate(&x) {
                    prop_assert_eq!(cells.iter().filter(|c| c.signs == s).count(), 1);
                }
            }
        }

        #[test]
        fn general_position_count(
            d in 1usize..=3,
            raw in proptest::collection::vec((proptest::collection::vec(-1000i64..=1000, 3), -1000i64..=1000), 0..=8),
        ) {
            let hs: Vec<Hyperplane> = raw
                .iter()
                .filter_map(|(nv, o)| Hyperplane::new(nv[..d].iter().map(|&v| q(v, 97)).collect(), q(*o, 89)).ok())
                .collect();
            prop_assume!(is_general_position(d, &hs));
            let n = hs.len();
            let arr = Arrangement::new(d, hs).unwrap();
            let expected: usize = (0..=d).map(|i| binom(n, i)).sum();
            prop_assert_eq!(arr.cells().len(), expected);
        }
    }

    /// Every subset of at most `d` normals is independent and no `d + 1`
    /// hyperplanes share a point.
    pub(crate) fn is_general_position(d: usize, hs: &[Hyperplane]) -> bool {
        use crate::linalg::matrix_rank;
        let n = hs.len();
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            if idx.len() > d + 1 {
                continue;
            }
            let normals: Vec<RVector> = idx.iter().map(|&i| hs[i].normal.clone()).collect();
            let aug: Vec<RVector> = idx
                .iter()
                .map(|&i| {
                    let mut r = hs[i].normal.clone();
                    r.push(hs[i].offset.clone());
                    r
                })
                .collect();
            let rn = matrix_rank(&RMatrix::from_rows(normals, d).unwrap());
            let ra = matrix_rank(&RMatrix::from_rows(aug, d + 1).unwrap());
            if idx.len() <= d && rn < idx.len() {
                return false;
            }
            if idx.len() == d + 1 && ra == rn {
                return false;
            }
        }
        true
    }
}
