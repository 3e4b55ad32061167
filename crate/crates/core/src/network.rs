//! Fully connected ReLU networks with a single affine output neuron.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{check_dim, dot, is_zero_vec, zeros, RMatrix, RVector};
use crate::rational::Rational;
use crate::zonotope::Zonotope;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: RMatrix,
    pub biases: RVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Output {
    pub weights: RVector,
    pub bias: Rational,
}

/// `x -> output.weights · relu(... relu(W_1 x + b_1) ...) + output.bias`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NetworkJson", into = "NetworkJson")]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<Layer>,
    output: Output,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkJson {
    layers: Vec<LayerJson>,
    output: Output,
    /// Needed only when the first layer has no neurons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_dim: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    weights: Vec<Vec<Rational>>,
    biases: Vec<Rational>,
}

impl TryFrom<NetworkJson> for ReluNetwork {
    type Error = Error;

    fn try_from(j: NetworkJson) -> Result<Self> {
        let Some(first) = j.layers.first() else {
            return input("a network needs at least one hidden layer");
        };
        let input_dim = match (first.weights.first(), j.input_dim) {
            (Some(r), Some(d)) => {
                check_dim(d, r.len())?;
                d
            }
            (Some(r), None) => r.len(),
            (None, Some(d)) => d,
            (None, None) => return input("empty first layer: input_dim is required"),
        };
        let mut cols = input_dim;
        let mut layers = Vec::with_capacity(j.layers.len());
        for l in j.layers {
            let weights = RMatrix::from_rows(l.weights, cols)?;
            cols = weights.nrows();
            layers.push(Layer { weights, biases: l.biases });
        }
        ReluNetwork::new(input_dim, layers, j.output)
    }
}

impl From<ReluNetwork> for NetworkJson {
    fn from(n: ReluNetwork) -> Self {
        let input_dim = (n.layers[0].weights.nrows() == 0).then_some(n.input_dim);
        NetworkJson {
            layers: n.layers.into_iter().map(|l| LayerJson { weights: l.weights.to_rows(), biases: l.biases }).collect(),
            output: n.output,
            input_dim,
        }
    }
}

/// The two zonotopes whose support functions difference to a bias-free
/// 2-layer network.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZonotopePair {
    pub plus: Zonotope,
    pub minus: Zonotope,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<Layer>, output: Output) -> Result<Self> {
        if layers.is_empty() {
            return input("a network needs at least one hidden layer");
        }
        let mut width = input_dim;
        for l in &layers {
            check_dim(width, l.weights.ncols())?;
            check_dim(l.weights.nrows(), l.biases.len())?;
            width = l.weights.nrows();
        }
        check_dim(width, output.weights.len())?;
        Ok(ReluNetwork { input_dim, layers, output })
    }

    /// One hidden layer: neuron `i` computes `max(0, rows[i]·x + biases[i])`.
    pub fn two_layer(
        input_dim: usize,
        rows: Vec<RVector>,
        biases: RVector,
        out_weights: RVector,
        out_bias: Rational,
    ) -> Result<Self> {
        let weights = RMatrix::from_rows(rows, input_dim)?;
        Self::new(input_dim, vec![Layer { weights, biases }], Output { weights: out_weights, bias: out_bias })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn output(&self) -> &Output {
        &self.output
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn num_neurons(&self) -> usize {
        self.layers.iter().map(|l| l.biases.len()).sum()
    }

    pub fn is_bias_free(&self) -> bool {
        self.output.bias.is_zero() && self.layers.iter().all(|l| is_zero_vec(&l.biases))
    }

    pub fn evaluate(&self, x: &[Rational]) -> Result<Rational> {
        check_dim(self.input_dim, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[Rational]) -> Rational {
        let mut a = x.to_vec();
        for l in &self.layers {
            a = l
                .weights
                .rows()
                .zip(&l.biases)
                .map(|(w, b)| {
                    let z = dot(w, &a) + b;
                    if z.is_positive() {
                        z
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
        }
        dot(&self.output.weights, &a) + &self.output.bias
    }

    fn require_two_layer(&self) -> Result<()> {
        if self.depth() != 1 {
            return input(format!("expected one hidden layer, found {}", self.depth()));
        }
        Ok(())
    }

    /// Same weights with every bias (hidden and output) set to zero.
    pub fn strip_biases(&self) -> ReluNetwork {
        let mut n = self.clone();
        for l in &mut n.layers {
            l.biases = zeros(l.biases.len());
        }
        n.output.bias = Rational::zero();
        n
    }

    /// Computes `-f`.
    pub fn negate(&self) -> ReluNetwork {
        let mut n = self.clone();
        n.output.weights = n.output.weights.iter().map(|v| -v).collect();
        n.output.bias = -&n.output.bias;
        n
    }

    pub fn with_output_weights(&self, weights: RVector) -> ReluNetwork {
        let mut n = self.clone();
        assert_eq!(weights.len(), n.output.weights.len(), "output width");
        n.output.weights = weights;
        n
    }

    pub fn with_output_bias(&self, bias: Rational) -> ReluNetwork {
        let mut n = self.clone();
        n.output.bias = bias;
        n
    }

    /// Bias-free network `h` on `(x, y)` with `h(x, 1) = f(x)`: hidden biases
    /// become coefficients of `y`, and the output bias `B` becomes
    /// `B·max(0, y) + B·max(0, -y) = B·|y|`.
    pub fn homogenize(&self) -> Result<ReluNetwork> {
        self.require_two_layer()?;
        let d = self.input_dim;
        let l = &self.layers[0];
        let mut rows: Vec<RVector> = l
            .weights
            .rows()
            .zip(&l.biases)
            .map(|(w, b)| {
                let mut r = w.to_vec();
                r.push(b.clone());
                r
            })
            .collect();
        let mut y = zeros(d + 1);
        y[d] = Rational::one();
        rows.push(y.clone());
        y[d] = -Rational::one();
        rows.push(y);
        let mut out = self.output.weights.clone();
        out.push(self.output.bias.clone());
        out.push(self.output.bias.clone());
        let n = rows.len();
        Self::two_layer(d + 1, rows, zeros(n), out, Rational::zero())
    }

    /// `h(x, 1) − h(−x, −1)` for the homogenization `h`, checked against
    /// `Σ c_i (w_i·x + b_i)`.
    pub fn homogenization_symmetry_defect(&self, x: &[Rational]) -> Result<Rational> {
        check_dim(self.input_dim, x.len())?;
        let h = self.homogenize()?;
        let mut pos = x.to_vec();
        pos.push(Rational::one());
        let mut negx: RVector = x.iter().map(|v| -v).collect();
        negx.push(-Rational::one());
        let defect = h.eval_unchecked(&pos) - h.eval_unchecked(&negx);
        let l = &self.layers[0];
        let linear: Rational = l
            .weights
            .rows()
            .zip(&l.biases)
            .zip(&self.output.weights)
            .map(|((w, b), c)| c * (dot(w, x) + b))
            .sum();
        assert_eq!(defect, linear, "symmetry defect identity violated");
        Ok(defect)
    }

    /// `Z⁺` collects `c_i w_i` for `c_i > 0`, `Z⁻` collects `|c_i| w_i` for
    /// `c_i < 0`, so that `f = support(Z⁺, ·) − support(Z⁻, ·)`.
    pub fn to_zonotope_pair(&self) -> Result<ZonotopePair> {
        self.require_two_layer()?;
        if !self.is_bias_free() {
            return input("network must be bias-free to dualize");
        }
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (w, c) in self.layers[0].weights.rows().zip(&self.output.weights) {
            let g: RVector = w.iter().map(|v| v * &c.abs()).collect();
            if c.is_positive() {
                plus.push(g);
            } else if c.is_negative() {
                minus.push(g);
            }
        }
        Ok(ZonotopePair { plus: Zonotope::new(self.input_dim, plus)?, minus: Zonotope::new(self.input_dim, minus)? })
    }

    /// Inverse of `to_zonotope_pair`: one `+1` neuron per generator of
    /// `plus`, one `−1` neuron per generator of `minus`.
    pub fn from_zonotope_pair(pair: &ZonotopePair) -> Result<ReluNetwork> {
        check_dim(pair.plus.dim(), pair.minus.dim())?;
        if !is_zero_vec(pair.plus.center()) || !is_zero_vec(pair.minus.center()) {
            return input("zonotope centers must be zero");
        }
        let mut rows = Vec::new();
        let mut out = Vec::new();
        for g in pair.plus.generators() {
            rows.push(g.clone());
            out.push(Rational::one());
        }
        for g in pair.minus.generators() {
            rows.push(g.clone());
            out.push(-Rational::one());
        }
        let n = rows.len();
        Self::two_layer(pair.plus.dim(), rows, zeros(n), out, Rational::zero())
    }

    /// Three-layer network computing `max(0, f(x))`.
    pub fn lift_to_3layer(&self) -> Result<ReluNetwork> {
        self.require_two_layer()?;
        let second = Layer {
            weights: RMatrix::from_rows(vec![self.output.weights.clone()], self.output.weights.len())?,
            biases: vec![self.output.bias.clone()],
        };
        Self::new(
            self.input_dim,
            vec![self.layers[0].clone(), second],
            Output { weights: vec![Rational::one()], bias: Rational::zero() },
        )
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rational::{q, qi};
    use proptest::prelude::*;

    pub(crate) fn net1(rows: &[&[i64]], biases: &[i64], out: &[i64], bias: i64) -> ReluNetwork {
        let d = rows.first().map_or(1, |r| r.len());
        ReluNetwork::two_layer(
            d,
            rows.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect(),
            biases.iter().map(|&v| qi(v)).collect(),
            out.iter().map(|&v| qi(v)).collect(),
            qi(bias),
        )
        .unwrap()
    }

    /// max(0,2x−1) − max(0,4x−4) + max(0,2x−3) + 4
    pub(crate) fn fig2() -> ReluNetwork {
        net1(&[&[2], &[4], &[2]], &[-1, -4, -3], &[1, -1, 1], 4)
    }

    fn scalar_fig2(x: &Rational) -> Rational {
        let r = |v: Rational| if v.is_positive() { v } else { qi(0) };
        r(qi(2) * x - qi(1)) - r(qi(4) * x - qi(4)) + r(qi(2) * x - qi(3)) + qi(4)
    }

    pub(crate) fn arb_net(max_d: usize, max_n: usize, biased: bool) -> impl Strategy<Value = ReluNetwork> {
        (1..=max_d, 0..=max_n).prop_flat_map(move |(d, n)| {
            (
                proptest::collection::vec(proptest::collection::vec(-3i64..=3, d), n),
                proptest::collection::vec(-3i64..=3, n),
                proptest::collection::vec(-2i64..=2, n),
                -3i64..=3,
            )
                .prop_map(move |(rows, b, c, bias)| {
                    ReluNetwork::two_layer(
                        d,
                        rows.iter().map(|r| r.iter().map(|&v| qi(v)).collect()).collect(),
                        b.iter().map(|&v| if biased { qi(v) } else { qi(0) }).collect(),
                        c.iter().map(|&v| qi(v)).collect(),
                        if biased { qi(bias) } else { qi(0) },
                    )
                    .unwrap()
                })
        })
    }

    pub(crate) fn arb_point(d: usize) -> impl Strategy<Value = RVector> {
        proptest::collection::vec((-40i64..=40, 1i64..=7), d).prop_map(|v| v.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn evaluate_examples() {
        let f = fig2();
        assert_eq!(f.evaluate(&[qi(0)]).unwrap(), qi(4));
        assert_eq!(f.evaluate(&[qi(2)]).unwrap(), qi(4));
        for k in -10..10 {
            let x = q(k, 3);
            assert_eq!(f.evaluate(&[x.clone()]).unwrap(), scalar_fig2(&x));
        }
        let zero = net1(&[&[0, 0]], &[0], &[0], 0);
        assert_eq!(zero.evaluate(&[qi(3), qi(-1)]).unwrap(), qi(0));
        assert!(f.evaluate(&[qi(0), qi(1)]).is_err());
    }

    #[test]
    fn homogenize_fig2() {
        let h = fig2().homogenize().unwrap();
        let expect = net1(&[&[2, -1], &[4, -4], &[2, -3], &[0, 1], &[0, -1]], &[0; 5], &[1, -1, 1, 4, 4], 0);
        assert_eq!(h, expect);
        for k in -5..5 {
            assert_eq!(h.evaluate(&[q(k, 2), qi(0)]).unwrap(), qi(0));
        }
    }

    #[test]
    fn homogenize_bias_free_adds_zero_neurons() {
        let f = net1(&[&[1, 2]], &[0], &[3], 0);
        let h = f.homogenize().unwrap();
        assert_eq!(h.output().weights, vec![qi(3), qi(0), qi(0)]);
        assert_eq!(h.input_dim(), 3);
    }

    #[test]
    fn symmetry_defect_examples() {
        let f = net1(&[&[1]], &[1], &[1], 0);
        assert_eq!(f.homogenization_symmetry_defect(&[qi(0)]).unwrap(), qi(1));
        let g = net1(&[&[1, 2], &[1, 2]], &[3, 3], &[1, -1], 5);
        assert_eq!(g.homogenization_symmetry_defect(&[qi(7), q(1, 2)]).unwrap(), qi(0));
    }

    #[test]
    fn zonotope_pair_examples() {
        let g = net1(&[&[1, 0], &[1, 1]], &[0, 0], &[1, -1], 0);
        let pair = g.to_zonotope_pair().unwrap();
        assert_eq!(pair.plus.generators(), &[vec![qi(1), qi(0)]]);
        assert_eq!(pair.minus.generators(), &[vec![qi(1), qi(1)]]);
        let only_plus = net1(&[&[1, 0]], &[0], &[2], 0).to_zonotope_pair().unwrap();
        assert_eq!(only_plus.minus.num_generators(), 0);
        assert!(fig2().to_zonotope_pair().is_err());

        let single = ZonotopePair {
            plus: Zonotope::new(1, vec![vec![qi(1)]]).unwrap(),
            minus: Zonotope::new(1, vec![]).unwrap(),
        };
        assert_eq!(ReluNetwork::from_zonotope_pair(&single).unwrap(), net1(&[&[1]], &[0], &[1], 0));
        let same = ZonotopePair { plus: pair.plus.clone(), minus: pair.plus.clone() };
        let zero = ReluNetwork::from_zonotope_pair(&same).unwrap();
        assert_eq!(zero.evaluate(&[qi(3), qi(-2)]).unwrap(), qi(0));
        let shifted = ZonotopePair { plus: pair.plus.translate(&[qi(1), qi(0)]), minus: pair.minus };
        assert!(ReluNetwork::from_zonotope_pair(&shifted).is_err());
    }

    #[test]
    fn lift_examples() {
        let neg = net1(&[&[0]], &[0], &[0], -1).lift_to_3layer().unwrap();
        assert_eq!(neg.depth(), 2);
        assert_eq!(neg.evaluate(&[qi(5)]).unwrap(), qi(0));
        let id = net1(&[&[1], &[-1]], &[0, 0], &[1, -1], 0).lift_to_3layer().unwrap();
        assert_eq!(id.evaluate(&[qi(3)]).unwrap(), qi(3));
        assert_eq!(id.evaluate(&[qi(-3)]).unwrap(), qi(0));
    }

    #[test]
    fn json_roundtrip() {
        let f = fig2();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"layers":[{"weights":[["2"],["4"],["2"]],"biases":["-1","-4","-3"]}],"output":{"weights":["1","-1","1"],"bias":"4"}}"#
        );
        assert_eq!(serde_json::from_str::<ReluNetwork>(&s).unwrap(), f);
        let empty = ReluNetwork::from_zonotope_pair(&ZonotopePair {
            plus: Zonotope::new(2, vec![]).unwrap(),
            minus: Zonotope::new(2, vec![]).unwrap(),
        })
        .unwrap();
        let s = serde_json::to_string(&empty).unwrap();
        assert_eq!(serde_json::from_str::<ReluNetwork>(&s).unwrap(), empty);
        let bad = r#"{"layers":[{"weights":[["1","2"]],"biases":["0"]}],"output":{"weights":["1","1"],"bias":"0"}}"#;
        assert!(serde_json::from_str::<ReluNetwork>(bad).is_err());
    }

    proptest! {
        #[test]
        fn positive_homogeneity(f in arb_net(3, 6, false), x in arb_point(3), lam in 0i64..=9) {
            let x = &x[..f.input_dim()];
            let scaled: RVector = x.iter().map(|v| v * q(lam, 4)).collect();
            prop_assert_eq!(f.evaluate(&scaled).unwrap(), f.evaluate(x).unwrap() * q(lam, 4));
        }

        #[test]
        fn homogenize_agrees(f in arb_net(3, 6, true), x in arb_point(3)) {
            let x = &x[..f.input_dim()];
            let h = f.homogenize().unwrap();
            prop_assert!(h.is_bias_free());
            let mut x1 = x.to_vec();
            x1.push(qi(1));
            prop_assert_eq!(h.evaluate(&x1).unwrap(), f.evaluate(x).unwrap());
            let mut x0 = x.to_vec();
            x0.push(qi(0));
            let zero_y: Rational = f.layers()[0].weights.rows().zip(&f.output().weights).map(|(w, c)| {
                let z = dot(w, x);
                if z.is_positive() { c * z } else { qi(0) }
            }).sum();
            prop_assert_eq!(h.evaluate(&x0).unwrap(), zero_y);
            f.homogenization_symmetry_defect(x).unwrap();
        }

        #[test]
        fn duality(f in arb_net(3, 6, false), x in arb_point(3)) {
            let x = &x[..f.input_dim()];
            let pair = f.to_zonotope_pair().unwrap();
            let fx = f.evaluate(x).unwrap();
            prop_assert_eq!(pair.plus.support(x).0 - pair.minus.support(x).0, fx.clone());
            let back = ReluNetwork::from_zonotope_pair(&pair).unwrap();
            prop_assert_eq!(back.evaluate(x).unwrap(), fx);
        }

        #[test]
        fn lift_is_relu_of_f(f in arb_net(3, 5, true), x in arb_point(3)) {
            let x = &x[..f.input_dim()];
            let fx = f.evaluate(x).unwrap();
            let expect = if fx.is_positive() { fx } else { qi(0) };
            prop_assert_eq!(f.lift_to_3layer().unwrap().evaluate(x).unwrap(), expect);
        }
    }
}
