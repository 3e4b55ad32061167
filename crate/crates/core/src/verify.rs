//! Exact decision and optimisation procedures over the linear pieces of a
//! network. Every returned witness is re-checked by a forward pass.

use rayon::prelude::*;
use serde::Serialize;

use crate::arrangement::step_below;
use crate::error::{input, Result};
use crate::linalg::{add, axpy, check_dim, dot, is_zero_vec, zeros, RVector};
use crate::lp::{lp_maximize, LpResult, Polyhedron};
use crate::network::ReluNetwork;
use crate::norm::{NormValue, PNorm};
use crate::rational::Rational;
use crate::regions::{linear_regions, LinearPiece, Regions};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyOutcome {
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<RVector>,
    /// network value at the witness
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
}

impl VerifyOutcome {
    fn holds() -> Self {
        VerifyOutcome { holds: true, witness: None, value: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurjectivityOutcome {
    pub holds: bool,
    /// point where the bias-free network is positive
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive: Option<RVector>,
    /// point where the bias-free network is negative
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative: Option<RVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MaxOutcome {
    Attained { value: Rational, argmax: RVector },
    /// `f` grows without bound along `point + t·ray`, `t >= 0`
    Unbounded { point: RVector, ray: RVector },
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IoOutcome {
    pub holds: bool,
    /// the input polyhedron is empty
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<RVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Rational>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzValue {
    pub value: NormValue,
    pub gradient: RVector,
}

/// Point on `point + t·ray` where the network exceeds `threshold`; the
/// network is affine along the ray, so the slope is read off two
/// evaluations.
fn walk_ray(net: &ReluNetwork, point: &[Rational], ray: &[Rational], threshold: &Rational) -> RVector {
    let f0 = net.eval_unchecked(point);
    let slope = net.eval_unchecked(&add(point, ray)) - &f0;
    assert!(slope.is_positive(), "ray must increase the network");
    let gap = threshold - &f0;
    let t = if gap.is_negative() { Rational::zero() } else { Rational::from_bigints((&gap / &slope).floor() + 1, 1.into()) };
    let x = axpy(point, &t, ray);
    debug_assert!(net.eval_unchecked(&x) > *threshold);
    x
}

/// Is there `x` with `f(x) > 0`?
pub fn positivity(net: &ReluNetwork) -> Result<VerifyOutcome> {
    let regions = linear_regions(net)?;
    Ok(positivity_on(net, &regions))
}

fn positivity_on(net: &ReluNetwork, regions: &Regions) -> VerifyOutcome {
    let zero = Rational::zero();
    let found = regions
        .pieces()
        .iter()
        .find(|p| p.value_at(&p.witness).is_positive())
        .map(|p| p.witness.clone())
        .or_else(|| {
            regions.pieces().par_iter().find_map_first(|piece| {
                if is_zero_vec(&piece.gradient) {
                    return None;
                }
                match lp_maximize(&piece.gradient, &regions.region(piece)).expect("dimensions match") {
                    LpResult::Optimal { point, .. } => piece.value_at(&point).is_positive().then_some(point),
                    LpResult::Unbounded { point, ray } => Some(walk_ray(net, &point, &ray, &zero)),
                    LpResult::Infeasible { .. } => None,
                }
            })
        });
    match found {
        Some(x) => {
            let v = net.eval_unchecked(&x);
            assert!(v.is_positive(), "positivity witness failed re-evaluation");
            VerifyOutcome { holds: true, witness: Some(x), value: Some(v) }
        }
        None => VerifyOutcome { holds: false, witness: None, value: None },
    }
}

/// A 2-layer network is surjective iff its bias-free part takes both signs.
pub fn surjectivity(net: &ReluNetwork) -> Result<SurjectivityOutcome> {
    if net.depth() != 1 {
        return input("surjectivity is implemented for one hidden layer");
    }
    let stripped = net.strip_biases();
    let regions = linear_regions(&stripped)?;
    let pos = positivity_on(&stripped, &regions);
    let negated = stripped.negate();
    let neg_regions = regions.negated();
    let neg = positivity_on(&negated, &neg_regions);
    Ok(SurjectivityOutcome { holds: pos.holds && neg.holds, positive: pos.witness, negative: neg.witness })
}

/// Does the network vanish identically?
pub fn zero_function_check(net: &ReluNetwork) -> Result<VerifyOutcome> {
    let regions = linear_regions(net)?;
    for piece in regions.pieces() {
        let x = if !piece.value_at(&piece.witness).is_zero() {
            piece.witness.clone()
        } else if !is_zero_vec(&piece.gradient) {
            step_along(&regions.region(piece), &piece.witness, &piece.gradient)
        } else {
            continue;
        };
        let v = net.eval_unchecked(&x);
        assert!(!v.is_zero(), "nonzero witness failed re-evaluation");
        return Ok(VerifyOutcome { holds: false, witness: Some(x), value: Some(v) });
    }
    Ok(VerifyOutcome::holds())
}

/// `p + δ·dir` for a small `δ > 0` keeping every strict inequality of
/// `region` that holds at `p`.
fn step_along(region: &Polyhedron, p: &[Rational], dir: &[Rational]) -> RVector {
    let bound = region
        .constraints()
        .filter_map(|(row, rhs)| {
            let rd = dot(row, dir);
            rd.is_positive().then(|| (rhs - dot(row, p)) / rd)
        })
        .min();
    axpy(p, &step_below(bound.as_ref()), dir)
}

/// `max_{x ∈ P} f(x)`, with ties broken by the lexicographically smallest
/// per-piece LP optimum.
pub fn max_over_polyhedron(net: &ReluNetwork, domain: &Polyhedron) -> Result<MaxOutcome> {
    check_dim(net.input_dim(), domain.dim())?;
    if domain.is_empty() {
        return Ok(MaxOutcome::Infeasible);
    }
    let regions = linear_regions(net)?;
    Ok(max_on(net, &regions, domain))
}

enum PieceMax {
    Value(Rational, RVector),
    Unbounded(RVector, RVector),
}

fn piece_max(regions: &Regions, piece: &LinearPiece, domain: &Polyhedron) -> Option<PieceMax> {
    let poly = regions.region(piece).intersect(domain).expect("dimensions match");
    match lp_maximize(&piece.gradient, &poly).expect("dimensions match") {
        LpResult::Optimal { point, .. } => Some(PieceMax::Value(piece.value_at(&point), point)),
        LpResult::Unbounded { point, ray } => Some(PieceMax::Unbounded(point, ray)),
        LpResult::Infeasible { .. } => None,
    }
}

fn max_on(net: &ReluNetwork, regions: &Regions, domain: &Polyhedron) -> MaxOutcome {
    let results: Vec<Option<PieceMax>> =
        regions.pieces().par_iter().map(|piece| piece_max(regions, piece, domain)).collect();
    let mut best: Option<(Rational, RVector)> = None;
    for r in results.into_iter().flatten() {
        match r {
            PieceMax::Unbounded(point, ray) => return MaxOutcome::Unbounded { point, ray },
            PieceMax::Value(v, x) => {
                let better = match &best {
                    None => true,
                    Some((bv, bx)) => v > *bv || (v == *bv && x < *bx),
                };
                if better {
                    best = Some((v, x));
                }
            }
        }
    }
    match best {
        Some((value, argmax)) => {
            assert_eq!(net.eval_unchecked(&argmax), value, "argmax failed re-evaluation");
            MaxOutcome::Attained { value, argmax }
        }
        None => MaxOutcome::Infeasible,
    }
}

/// Decides `f(P) ⊆ [lo, hi]` (either bound may be absent).
pub fn verify_io(
    net: &ReluNetwork,
    domain: &Polyhedron,
    lo: Option<&Rational>,
    hi: Option<&Rational>,
) -> Result<IoOutcome> {
    check_dim(net.input_dim(), domain.dim())?;
    if domain.is_empty() {
        return Ok(IoOutcome { holds: true, vacuous: true, counterexample: None, value: None });
    }
    let regions = linear_regions(net)?;
    let violation = |f: &ReluNetwork, regions: &Regions, bound: &Rational| -> Option<RVector> {
        match max_on(f, regions, domain) {
            MaxOutcome::Attained { value, argmax } => (value > *bound).then_some(argmax),
            MaxOutcome::Unbounded { point, ray } => Some(walk_ray(f, &point, &ray, bound)),
            MaxOutcome::Infeasible => None,
        }
    };
    let mut bad = hi.and_then(|h| violation(net, &regions, h));
    if bad.is_none() {
        if let Some(l) = lo {
            bad = violation(&net.negate(), &regions.negated(), &-l);
        }
    }
    Ok(match bad {
        Some(x) => {
            let v = net.eval_unchecked(&x);
            assert!(
                hi.is_some_and(|h| v > *h) || lo.is_some_and(|l| v < *l),
                "counterexample failed re-evaluation"
            );
            IoOutcome { holds: false, vacuous: false, counterexample: Some(x), value: Some(v) }
        }
        None => IoOutcome { holds: true, vacuous: false, counterexample: None, value: None },
    })
}

/// Exact `L_p` Lipschitz constant: the largest dual norm of a piece
/// gradient.
pub fn lipschitz_exact(net: &ReluNetwork, p: &PNorm) -> Result<LipschitzValue> {
    let regions = linear_regions(net)?;
    let mut grads: Vec<RVector> = regions.pieces().iter().map(|piece| piece.gradient.clone()).collect();
    grads.sort();
    grads.dedup();
    let (value, at) = p.dual().argmax(&grads).unwrap_or((NormValue::Exact(Rational::zero()), &[]));
    let gradient = if at.is_empty() { zeros(net.input_dim()) } else { at.to_vec() };
    Ok(LipschitzValue { value, gradient })
}
