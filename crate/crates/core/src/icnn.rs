//! Input-convex networks: Newton polytopes as extended formulations and the
//! LP-based L1 / L-infinity Lipschitz constants.
//!
//! A bias-free ICNN computes a convex positively homogeneous function, which
//! is the support function of its Newton polytope. The polytope is built
//! bottom-up: a first-layer neuron `max(0, w·x)` gives the segment
//! `conv{0, w}`, nonnegative combinations give Minkowski sums, and a deeper
//! neuron `max(0, ·)` gives `conv({0} ∪ P)`. Every node is encoded as the cone
//! over its polytope at a level variable `t`, so `conv({0} ∪ P)` at level `t`
//! is just `P` at a fresh level `s` with `0 <= s <= t`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::linalg::{unit, zeros, RMatrix, RVector};
use crate::lp::{lp_maximize, LpResult, Polyhedron};
use crate::network::ReluNetwork;
use crate::norm::PNorm;
use crate::rational::Rational;

/// Largest input dimension accepted for the `2^d` sign-vector loop.
pub const MAX_SIGN_DIM: usize = 20;

pub fn is_icnn(net: &ReluNetwork) -> bool {
    let hidden = net.layers()[1..].iter().all(|l| l.weights.rows().flatten().all(|w| !w.is_negative()));
    hidden && net.output().weights.iter().all(|w| !w.is_negative())
}

/// A polytope `Q` in `R^{d+m}` whose projection onto the first `d`
/// coordinates is the Newton polytope.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExtendedPolytope {
    pub q: Polyhedron,
    pub dim: usize,
}

impl ExtendedPolytope {
    pub fn project(&self, y: &[Rational]) -> RVector {
        y[..self.dim].to_vec()
    }

    /// Exact membership of `g` in the projection.
    pub fn contains(&self, g: &[Rational]) -> Result<bool> {
        let mut fixed = self.q.clone();
        for (i, gi) in g.iter().enumerate() {
            let e = unit(self.q.dim(), i);
            fixed.push(e.iter().map(|v| -v).collect(), -gi)?;
            fixed.push(e, gi.clone())?;
        }
        Ok(!fixed.is_empty())
    }

    pub fn num_aux(&self) -> usize {
        self.q.dim() - self.dim
    }

    /// `max_{y ∈ Q} c·π(y)` together with a maximiser's projection.
    pub fn support(&self, c: &[Rational]) -> Result<(Rational, RVector)> {
        let mut obj = c.to_vec();
        obj.resize(self.q.dim(), Rational::zero());
        match lp_maximize(&obj, &self.q)? {
            LpResult::Optimal { value, point, .. } => Ok((value, self.project(&point))),
            other => unreachable!("Newton polytope LP is bounded and feasible: {other:?}"),
        }
    }
}

struct Builder<'a> {
    net: &'a ReluNetwork,
    d: usize,
    rows: Vec<(Vec<(usize, Rational)>, Rational)>,
    aux: usize,
}

impl Builder<'_> {
    fn fresh(&mut self) -> usize {
        self.aux += 1;
        self.d + self.aux - 1
    }

    /// `0 <= s <= t`, where `t = None` stands for the constant 1.
    fn level(&mut self, t: Option<usize>) -> usize {
        let s = self.fresh();
        self.rows.push((vec![(s, -Rational::one())], Rational::zero()));
        match t {
            Some(t) => self.rows.push((vec![(s, Rational::one()), (t, -Rational::one())], Rational::zero())),
            None => self.rows.push((vec![(s, Rational::one())], Rational::one())),
        }
        s
    }

    /// Adds neuron `j` of hidden layer `layer` scaled by `weight` to the
    /// gradient expression `g` (one sparse linear form per coordinate).
    fn neuron(&mut self, layer: usize, j: usize, weight: &Rational, t: Option<usize>, g: &mut [Vec<(usize, Rational)>]) {
        let s = self.level(t);
        let w = self.net.layers()[layer].weights.row(j).to_vec();
        if layer == 0 {
            for (gi, wi) in g.iter_mut().zip(&w) {
                if !wi.is_zero() {
                    gi.push((s, weight * wi));
                }
            }
            return;
        }
        for (i, v) in w.iter().enumerate() {
            if !v.is_zero() {
                self.neuron(layer - 1, i, &(weight * v), Some(s), g);
            }
        }
    }
}

/// Extended formulation of the Newton polytope of the bias-free version of
/// an ICNN.
pub fn newton_polytope_extended(net: &ReluNetwork) -> Result<ExtendedPolytope> {
    if !is_icnn(net) {
        return input("network is not input-convex (negative weight beyond the first layer)");
    }
    let d = net.input_dim();
    let mut b = Builder { net, d, rows: Vec::new(), aux: 0 };
    let mut g: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d];
    let top = net.depth() - 1;
    for (j, c) in net.output().weights.iter().enumerate() {
        if !c.is_zero() {
            b.neuron(top, j, c, None, &mut g);
        }
    }
    let n = d + b.aux;
    let mut a = RMatrix::zeros(0, n);
    let mut rhs = Vec::new();
    let mut push = |terms: &[(usize, Rational)], r: Rational| {
        let mut row = zeros(n);
        for (k, v) in terms {
            row[*k] += v;
        }
        a.push_row(row).expect("row width");
        rhs.push(r);
    };
    // g_i = Σ coef·s
    for (i, terms) in g.iter().enumerate() {
        let mut eq: Vec<(usize, Rational)> = terms.iter().map(|(k, v)| (*k, -v)).collect();
        eq.push((i, Rational::one()));
        push(&eq, Rational::zero());
        let neg: Vec<(usize, Rational)> = eq.iter().map(|(k, v)| (*k, -v)).collect();
        push(&neg, Rational::zero());
    }
    for (terms, r) in &b.rows {
        push(terms, r.clone());
    }
    Ok(ExtendedPolytope { q: Polyhedron::new(a, rhs)?, dim: d })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IcnnLipschitz {
    pub value: Rational,
    /// a point of the Newton polytope attaining the value
    pub gradient: RVector,
    pub lp_count: usize,
}

/// `L_1` via `2d` LPs (`max ‖a‖_∞`) or `L_∞` via `2^d` LPs (`max ‖a‖_1`)
/// over the Newton polytope.
pub fn icnn_lipschitz(net: &ReluNetwork, p: &PNorm) -> Result<IcnnLipschitz> {
    let d = net.input_dim();
    let directions: Vec<RVector> = match p {
        PNorm::One => (0..d)
            .flat_map(|i| {
                let e = unit(d, i);
                [e.iter().map(|v| -v).collect(), e]
            })
            .collect(),
        PNorm::Inf => {
            if d > MAX_SIGN_DIM {
                return Err(Error::Resource(format!(
                    "L_inf on an ICNN needs 2^{d} LPs (limit 2^{MAX_SIGN_DIM})"
                )));
            }
            (0..1usize << d)
                .map(|mask| (0..d).map(|i| if mask >> i & 1 == 1 { Rational::one() } else { -Rational::one() }).collect())
                .collect()
        }
        _ => return input(format!("ICNN Lipschitz constants are available for p = 1 and p = inf, not {p}")),
    };
    let q = newton_polytope_extended(net)?;
    let results = directions.par_iter().map(|c| q.support(c)).collect::<Result<Vec<_>>>()?;
    let lp_count = results.len();
    let (value, gradient) = results
        .into_iter()
        .reduce(|best, r| if r.0 > best.0 { r } else { best })
        .unwrap_or((Rational::zero(), zeros(d)));
    debug_assert_eq!(value, if d == 0 { Rational::zero() } else { p.dual().eval(&gradient).exact().expect("rational norm") });
    Ok(IcnnLipschitz { value, gradient, lp_count })
}
