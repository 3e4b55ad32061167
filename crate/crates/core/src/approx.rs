//! Randomized zonotope order reduction by l1 Lewis-weight row sampling, and
//! approximate norm maximisation on the reduced zonotope.
//!
//! With `c` the center and `B` the matrix of rows `a_i / 2`, the support
//! function of `Z - c` is `x -> ‖B x‖_1`. Sampling rows of `B` with
//! probabilities proportional to their l1 Lewis weights and rescaling by
//! `1 / (r·p_i)` gives `B'` with `‖B' x‖_1 ≈ ‖B x‖_1` for all `x`, so the
//! zonotope with generators `2 b'_j` centered at `c` approximates `Z`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Result};
use crate::linalg::{sub, RVector};
use crate::norm::{NormValue, PNorm};
use crate::rational::Rational;
use crate::zonotope::Zonotope;

/// Fixed-point iterations for the Lewis weights.
pub const LEWIS_ITERATIONS: usize = 30;
pub const DEFAULT_SAMPLING_CONSTANT: f64 = 20.0;
pub const DEFAULT_REPETITIONS: usize = 5;
/// Directions used to rank repetitions by distortion.
const SCORE_DIRECTIONS: usize = 64;
/// Sampled generators are rounded to about this many significant bits.
const OUTPUT_BITS: i32 = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReduceOptions {
    pub sampling_constant: f64,
    pub repetitions: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions { sampling_constant: DEFAULT_SAMPLING_CONSTANT, repetitions: DEFAULT_REPETITIONS }
    }
}

/// Approximate l1 Lewis weights of the rows of `b`, via
/// `w_i <- (b_iᵀ (Bᵀ W⁻¹ B)⁻¹ b_i)^{1/2}` from `w = 1`. Rank-deficient input is
/// first mapped onto an orthonormal basis of its row space; zero rows get
/// weight 0.
pub fn lewis_weights_l1(b: &DMatrix<f64>) -> Result<Vec<f64>> {
    lewis_weights_iter(b, LEWIS_ITERATIONS)
}

fn lewis_weights_iter(b: &DMatrix<f64>, iterations: usize) -> Result<Vec<f64>> {
    let b = full_rank(b)?;
    let (n, d) = b.shape();
    let mut w = vec![1.0; n];
    for _ in 0..iterations {
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (i, wi) in w.iter().enumerate() {
            if *wi > 0.0 {
                let row = b.row(i).transpose();
                m += &row * row.transpose() / *wi;
            }
        }
        let Some(inv) = m.try_inverse() else {
            return input("Lewis weight iteration lost full rank");
        };
        for (i, wi) in w.iter_mut().enumerate() {
            let row = b.row(i).transpose();
            *wi = (row.transpose() * &inv * &row)[(0, 0)].max(0.0).sqrt();
        }
    }
    let total: f64 = w.iter().sum();
    debug_assert!(total >= 0.5 * d as f64 && total <= 2.0 * d as f64, "Lewis weights sum {total} for rank {d}");
    Ok(w)
}

/// `b·V` for an orthonormal basis `V` of the row space of `b`.
fn full_rank(b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let svd = b.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = top * 1e-12 * b.nrows().max(b.ncols()) as f64;
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > tol).collect();
    if keep.is_empty() {
        return input("matrix has rank 0");
    }
    if keep.len() == b.ncols() {
        return Ok(b.clone());
    }
    let basis = DMatrix::from_fn(b.ncols(), keep.len(), |r, c| v_t[(keep[c], r)]);
    Ok(b * basis)
}

/// Number of sampled rows `⌈C·d·ln(d+1)/ε²⌉`.
pub fn sample_size(d: usize, epsilon: f64, sampling_constant: f64) -> usize {
    (sampling_constant * d as f64 * ((d + 1) as f64).ln() / (epsilon * epsilon)).ceil() as usize
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampledEmbedding {
    /// merged sampled rows `b'_j`
    pub reduced_rows: Vec<RVector>,
    pub sample_indices: Vec<usize>,
    /// `1 / (r·p_i)` per distinct sampled index, times its multiplicity
    pub scale_factors: Vec<Rational>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Reduction {
    pub zonotope: Zonotope,
    /// `None` when `r >= n` and the input is returned unchanged
    pub embedding: Option<SampledEmbedding>,
    pub sample_size: usize,
}

fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Rational::to_f64).collect()
}

fn rationalize(v: f64, shift: i32) -> Rational {
    let scaled = (v * 2f64.powi(shift)).round();
    let num = BigInt::from(scaled as i128);
    if shift >= 0 {
        Rational::from_bigints(num, BigInt::from(1) << shift as u32)
    } else {
        Rational::from_bigints(num << (-shift) as u32, BigInt::from(1))
    }
}

/// `h_{Z-c}(x) = ‖B x‖_1` for the rows of `B`.
fn centered_support(rows: &[Vec<f64>], x: &[f64]) -> f64 {
    rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs()).sum()
}

/// Reduces the number of generators to `O(d log d / ε²)`; with high
/// probability `(1+ε)^{-1}(Z' - c) ⊆ Z - c ⊆ (1+ε)(Z' - c)`. The center `c`
/// is kept explicitly. Runs `repetitions` independent samples and returns
/// the one with median distortion.
pub fn order_reduce(z: &Zonotope, epsilon: &Rational, seed: u64, opts: &ReduceOptions) -> Result<Reduction> {
    if !epsilon.is_positive() {
        return input(format!("epsilon must be positive, got {epsilon}"));
    }
    if opts.repetitions == 0 || opts.sampling_constant.is_nan() || opts.sampling_constant <= 0.0 {
        return input("need at least one repetition and a positive sampling constant");
    }
    let d = z.dim();
    let n = z.num_generators();
    let r = sample_size(d, epsilon.to_f64(), opts.sampling_constant);
    if n == 0 || r >= n {
        return Ok(Reduction { zonotope: z.clone(), embedding: None, sample_size: r });
    }
    let half: Vec<Vec<f64>> = z.generators().iter().map(|a| to_f64(a).iter().map(|v| v / 2.0).collect()).collect();
    let b = DMatrix::from_fn(n, d, |i, j| half[i][j]);
    let w = lewis_weights_l1(&b)?;
    let mut center = z.center().to_vec();
    for a in z.generators() {
        for (c, ai) in center.iter_mut().zip(a) {
            *c += ai / Rational::from_integer(2);
        }
    }
    let candidates: Vec<SampledEmbedding> =
        (0..opts.repetitions).into_par_iter().map(|rep| sample_rows(&half, &w, r, seed, rep as u64)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let probes: Vec<Vec<f64>> = (0..SCORE_DIRECTIONS)
        .map(|_| (0..d).map(|_| rand_distr_normal(&mut rng)).collect())
        .collect();
    let base: Vec<f64> = probes.iter().map(|x| centered_support(&half, x)).collect();
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let rows: Vec<Vec<f64>> = c.reduced_rows.iter().map(|r| to_f64(r)).collect();
            let dist: f64 = probes
                .iter()
                .zip(&base)
                .filter(|(_, b)| **b > 0.0)
                .map(|(x, b)| (centered_support(&rows, x) / b).ln())
                .sum::<f64>()
                / SCORE_DIRECTIONS as f64;
            (dist, i)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let pick = candidates[scored[scored.len() / 2].1].clone();
    let mut gens = Vec::with_capacity(pick.reduced_rows.len());
    for row in &pick.reduced_rows {
        center = sub(&center, row);
        gens.push(row.iter().map(|v| v * Rational::from_integer(2)).collect());
    }
    Ok(Reduction { zonotope: Zonotope::with_center(gens, center)?, embedding: Some(pick), sample_size: r })
}

/// Standard normal sample (Box–Muller) from the seeded stream.
fn rand_distr_normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

fn sample_rows(half: &[Vec<f64>], w: &[f64], r: usize, seed: u64, rep: u64) -> Result<SampledEmbedding> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    let total: f64 = w.iter().sum();
    let dist = WeightedIndex::new(w).map_err(|e| crate::error::Error::Input(format!("sampling weights: {e}")))?;
    let mut counts = vec![0usize; w.len()];
    for _ in 0..r {
        counts[dist.sample(&mut rng)] += 1;
    }
    let scale_of = |i: usize| counts[i] as f64 * total / (r as f64 * w[i]);
    let picked: Vec<usize> = (0..w.len()).filter(|&i| counts[i] > 0).collect();
    let top = picked
        .iter()
        .flat_map(|&i| half[i].iter().map(move |v| (v * scale_of(i)).abs()))
        .fold(0.0, f64::max);
    let shift = OUTPUT_BITS - top.log2().ceil().max(-1000.0) as i32;
    let mut reduced_rows = Vec::with_capacity(picked.len());
    let mut sample_indices = Vec::with_capacity(picked.len());
    let mut scale_factors = Vec::with_capacity(picked.len());
    for &i in &picked {
        let s = scale_of(i);
        let row: RVector = half[i].iter().map(|v| rationalize(v * s, shift)).collect();
        if row.iter().any(|v| !v.is_zero()) {
            reduced_rows.push(row);
            sample_indices.push(i);
            scale_factors.push(rationalize(s, OUTPUT_BITS - s.log2().ceil() as i32));
        }
    }
    Ok(SampledEmbedding { reduced_rows, sample_indices, scale_factors, seed })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproxMax {
    pub alpha: f64,
    pub argmax: RVector,
    /// generators of the zonotope the maximum was taken over
    pub reduced_generators: usize,
}

/// `α` with `(1+ε)^{-1} α <= max_{x∈Z} ‖x‖ <= (1+ε) α` with high probability,
/// for any convex absolutely homogeneous `norm`: the maximum over the
/// vertices of the reduced zonotope.
pub fn approx_norm_max<F>(z: &Zonotope, norm: F, epsilon: &Rational, seed: u64, opts: &ReduceOptions) -> Result<ApproxMax>
where
    F: Fn(&[Rational]) -> f64 + Sync,
{
    let red = order_reduce(z, epsilon, seed, opts)?;
    let verts = red.zonotope.vertices();
    let values: Vec<f64> = verts.par_iter().map(|v| norm(v)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(ApproxMax { alpha: values[best], argmax: verts[best].clone(), reduced_generators: red.zonotope.num_generators() })
}

/// `approx_norm_max` for `L_p` norms, with the value kept exact where it can be.
pub fn approx_lp_norm_max(
    z: &Zonotope,
    p: &PNorm,
    epsilon: &Rational,
    seed: u64,
    opts: &ReduceOptions,
) -> Result<(NormValue, RVector)> {
    let red = order_reduce(z, epsilon, seed, opts)?;
    let m = red.zonotope.lp_norm_max(p);
    Ok((m.value, m.argmax))
}
