//! Linear regions of 2- and 3-layer ReLU networks.
//!
//! First-layer regions are the cells of the arrangement of first-layer
//! neuron hyperplanes. For 3-layer networks each such cell is refined by the
//! second-layer preactivations, which are affine inside the cell; the
//! refinement branches on one neuron at a time and prunes empty sides with
//! an interior-point LP.

use rayon::prelude::*;

use crate::arrangement::{step_below, Arrangement, Cell, Hyperplane, Sign};
use crate::error::{input, Result};
use crate::linalg::{axpy, dot, is_zero_vec, neg, zeros, RMatrix, RVector};
use crate::lp::Polyhedron;
use crate::network::ReluNetwork;
use crate::rational::Rational;

/// An affine piece `x -> gradient·x + offset` of the network, valid on a
/// full-dimensional region that contains `witness` in its interior.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPiece {
    pub witness: RVector,
    pub gradient: RVector,
    pub offset: Rational,
    first_layer: Vec<Sign>,
    /// further closed constraints `row·x <= rhs` (3-layer refinements)
    extra: Vec<(RVector, Rational)>,
}

impl LinearPiece {
    pub fn value_at(&self, x: &[Rational]) -> Rational {
        dot(&self.gradient, x) + &self.offset
    }

    pub fn first_layer_signs(&self) -> &[Sign] {
        &self.first_layer
    }
}

/// All linear pieces of a network, sharing the first-layer arrangement.
#[derive(Clone, Debug)]
pub struct Regions {
    arrangement: Arrangement,
    pieces: Vec<LinearPiece>,
}

impl Regions {
    pub fn pieces(&self) -> &[LinearPiece] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    /// Pieces of `−f` on the same regions.
    pub fn negated(&self) -> Regions {
        let mut r = self.clone();
        for piece in &mut r.pieces {
            piece.gradient = neg(&piece.gradient);
            piece.offset = -&piece.offset;
        }
        r
    }

    /// Closed H-representation of a piece's region.
    pub fn region(&self, piece: &LinearPiece) -> Polyhedron {
        let mut p = self.arrangement.restrict_to_cell(&piece.first_layer).expect("signs match arrangement");
        for (row, rhs) in &piece.extra {
            p.push(row.clone(), rhs.clone()).expect("row has input dimension");
        }
        p
    }
}

/// First-layer neuron `i` of the network as a hyperplane, if its weight row
/// is nonzero. Zero rows give constant neurons.
fn first_layer_arrangement(net: &ReluNetwork) -> (Arrangement, Vec<Option<usize>>) {
    let l = &net.layers()[0];
    let mut planes = Vec::new();
    let mut map = Vec::with_capacity(l.biases.len());
    for (w, b) in l.weights.rows().zip(&l.biases) {
        if is_zero_vec(w) {
            map.push(None);
        } else {
            map.push(Some(planes.len()));
            planes.push(Hyperplane::new(w.to_vec(), -b).expect("nonzero row"));
        }
    }
    let arr = Arrangement::new(net.input_dim(), planes).expect("rows have input dimension");
    (arr, map)
}

/// Affine map of the first hidden layer on a cell: active neurons pass
/// `w_i·x + b_i`, inactive ones output 0.
fn first_layer_active(net: &ReluNetwork, arr: &Arrangement, map: &[Option<usize>], cell: &Cell) -> Vec<bool> {
    let l = &net.layers()[0];
    map.iter()
        .zip(&l.biases)
        .map(|(m, b)| match m {
            Some(i) => arr.original_sign(&cell.signs, *i) == Sign::Plus,
            None => b.is_positive(),
        })
        .collect()
}

/// Combination `Σ_i coeffs_i·[active_i]·(w_i, b_i)` of first-layer neurons.
fn combine(net: &ReluNetwork, active: &[bool], coeffs: &[Rational]) -> (RVector, Rational) {
    let l = &net.layers()[0];
    let mut g = zeros(net.input_dim());
    let mut h = Rational::zero();
    for (((w, b), c), &on) in l.weights.rows().zip(&l.biases).zip(coeffs).zip(active) {
        if on && !c.is_zero() {
            for (gi, wi) in g.iter_mut().zip(w) {
                if !wi.is_zero() {
                    *gi += c * wi;
                }
            }
            h += c * b;
        }
    }
    (g, h)
}

pub fn linear_regions(net: &ReluNetwork) -> Result<Regions> {
    if net.depth() > 2 {
        return input(format!("regions are supported for at most 2 hidden layers, found {}", net.depth()));
    }
    let (arr, map) = first_layer_arrangement(net);
    let cells = arr.cells();
    let out = net.output();
    let pieces: Vec<LinearPiece> = if net.depth() == 1 {
        cells
            .into_par_iter()
            .map(|cell| {
                let active = first_layer_active(net, &arr, &map, &cell);
                let (gradient, h) = combine(net, &active, &out.weights);
                LinearPiece {
                    witness: cell.witness,
                    gradient,
                    offset: h + &out.bias,
                    first_layer: cell.signs,
                    extra: vec![],
                }
            })
            .collect()
    } else {
        cells
            .into_par_iter()
            .map(|cell| refine_cell(net, &arr, &map, cell))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    Ok(Regions { arrangement: arr, pieces })
}

struct Refiner<'a> {
    /// second-layer preactivations `g_j·x + h_j` on this cell
    pre: Vec<(RVector, Rational)>,
    out_weights: &'a [Rational],
    out_bias: &'a Rational,
    first_layer: Vec<Sign>,
    pieces: Vec<LinearPiece>,
}

fn refine_cell(net: &ReluNetwork, arr: &Arrangement, map: &[Option<usize>], cell: Cell) -> Vec<LinearPiece> {
    let active = first_layer_active(net, arr, map, &cell);
    let second = &net.layers()[1];
    let pre = second
        .weights
        .rows()
        .zip(&second.biases)
        .map(|(v, b2)| {
            let (g, h) = combine(net, &active, v);
            (g, h + b2)
        })
        .collect();
    // open region as strict inequalities row·x < rhs
    let mut rows: Vec<(RVector, Rational)> = arr
        .hyperplanes()
        .iter()
        .zip(&cell.signs)
        .map(|(hp, s)| match s {
            Sign::Minus => (hp.normal.clone(), hp.offset.clone()),
            Sign::Plus => (neg(&hp.normal), -&hp.offset),
        })
        .collect();
    let n_first = rows.len();
    let mut r = Refiner {
        pre,
        out_weights: &net.output().weights,
        out_bias: &net.output().bias,
        first_layer: cell.signs,
        pieces: vec![],
    };
    let mut on = Vec::with_capacity(r.pre.len());
    r.branch(net.input_dim(), &mut rows, n_first, cell.witness, &mut on);
    r.pieces
}

impl Refiner<'_> {
    fn branch(&mut self, dim: usize, rows: &mut Vec<(RVector, Rational)>, n_first: usize, p: RVector, on: &mut Vec<bool>) {
        let j = on.len();
        if j == self.pre.len() {
            let mut gradient = zeros(dim);
            let mut offset = self.out_bias.clone();
            for ((g, h), (&a, c)) in self.pre.iter().zip(on.iter().zip(self.out_weights)) {
                if a && !c.is_zero() {
                    gradient = axpy(&gradient, c, g);
                    offset += c * h;
                }
            }
            self.pieces.push(LinearPiece {
                witness: p,
                gradient,
                offset,
                first_layer: self.first_layer.clone(),
                extra: rows[n_first..].to_vec(),
            });
            return;
        }
        let (g, h) = self.pre[j].clone();
        if is_zero_vec(&g) {
            on.push(h.is_positive());
            self.branch(dim, rows, n_first, p, on);
            on.pop();
            return;
        }
        let v = dot(&g, &p) + &h;
        // side constraints: inactive g·x + h < 0, active −g·x − h < 0
        let sides = [(false, (g.clone(), -&h)), (true, (neg(&g), h.clone()))];
        let on_plane = v.is_zero();
        let delta = on_plane.then(|| {
            let bound = rows
                .iter()
                .filter_map(|(row, rhs)| {
                    let rg = dot(row, &g);
                    (!rg.is_zero()).then(|| ((rhs - dot(row, &p)) / rg).abs())
                })
                .min();
            step_below(bound.as_ref())
        });
        for (active, constraint) in sides {
            let start = if let Some(delta) = &delta {
                Some(axpy(&p, &if active { delta.clone() } else { -delta }, &g))
            } else if v.is_positive() == active {
                Some(p.clone())
            } else {
                let mut poly = Polyhedron::new(
                    RMatrix::from_rows(rows.iter().map(|(r, _)| r.clone()).collect(), dim).expect("rows"),
                    rows.iter().map(|(_, b)| b.clone()).collect(),
                )
                .expect("dims");
                poly.push(constraint.0.clone(), constraint.1.clone()).expect("dims");
                poly.interior_point()
            };
            if let Some(q) = start {
                rows.push(constraint);
                on.push(active);
                self.branch(dim, rows, n_first, q, on);
                on.pop();
                rows.pop();
            }
        }
    }
}
