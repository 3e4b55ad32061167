//! Networks encoding the multicolored clique problem.
//!
//! Node `i` of color `c` gets a Sidon label `ω_{c,i}`. The raw-sum network
//! on `x ∈ R^k` adds one penalty tent per node on `x_c` and one spike tent
//! per edge on `x_r + x_l` centered at `ω_{r,i} + ω_{l,j}`. Its maximum is
//! `k + C(k,2)` exactly when the graph has a multicolored clique and at most
//! one less otherwise.

pub mod gadgets;
pub mod graph;
pub mod sidon;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use gadgets::{build_penalty, build_spike, eval_gadget, NeuronTriple, Ramp};
pub use graph::{brute_force_clique, ColoredGraph};
pub use sidon::{greedy_sidon, is_sidon, SidonLabels};

use crate::error::{input, Error, Result};
use crate::linalg::{zeros, RVector};
use crate::lp::Polyhedron;
use crate::network::ReluNetwork;
use crate::rational::{q, qi, Rational};

/// Exponent `p` of the Lipschitz instance; `(0, 1)` is allowed here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Exponent {
    Finite(Rational),
    Inf,
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let p = match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => return Ok(Exponent::Inf),
            t => t.parse::<Rational>().map_err(|e| Error::Input(format!("exponent: {e}")))?,
        };
        if !p.is_positive() {
            return input(format!("exponent must be positive, got {p}"));
        }
        Ok(Exponent::Finite(p))
    }
}

impl TryFrom<String> for Exponent {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Exponent> for String {
    fn from(p: Exponent) -> String {
        p.to_string()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    /// `f` on `R^k`, ranging over `[0, k + C(k,2)]`
    RawSum,
    /// homogenization of `f + 1 - k - C(k,2)` on `R^{k+1}`, bias-free
    Positivity,
    /// homogenization of `f` with `y` coefficients scaled by `epsilon`
    Lipschitz { p: Exponent, epsilon: Rational, threshold: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardnessInstance {
    pub network: ReluNetwork,
    #[serde(flatten)]
    pub kind: InstanceKind,
    pub graph: ColoredGraph,
    pub labels: SidonLabels,
    pub k: usize,
}

/// `k + C(k,2)`, the number of gadgets that can fire together.
pub fn clique_value(k: usize) -> Rational {
    qi((k + k * k.saturating_sub(1) / 2) as i64)
}

/// One hidden neuron: `weight · max(0, slope·(Σ_{i∈support} x_i - knot·y_scale))`
/// on `k` inputs, plus a trailing `y` input when `y_scale` is given.
struct NeuronSpec {
    row: RVector,
    bias: Rational,
    weight: Rational,
}

fn gadget_neurons(g: &ColoredGraph, labels: &SidonLabels, y_scale: Option<&Rational>) -> Result<Vec<NeuronSpec>> {
    let k = g.k();
    let width = k + usize::from(y_scale.is_some());
    let mut out = Vec::with_capacity(3 * (g.num_nodes() + g.num_edges()));
    let mut emit = |support: &[usize], triples: Vec<NeuronTriple>| {
        for r in triples.iter().flatten() {
            let mut row = zeros(width);
            for &i in support {
                row[i] = r.slope.clone();
            }
            let shift = -(&r.slope * &r.knot);
            let bias = match y_scale {
                Some(eps) => {
                    row[k] = shift * eps;
                    Rational::zero()
                }
                None => shift,
            };
            out.push(NeuronSpec { row, bias, weight: r.weight.clone() });
        }
    };
    for c in 0..k {
        emit(&[c], build_penalty(&labels.per_color[c])?);
    }
    for r in 0..k {
        for l in r + 1..k {
            let sums: Vec<u64> =
                g.edges_between(r, l).iter().map(|&(i, j)| labels.omega(r, i) + labels.omega(l, j)).collect();
            emit(&[r, l], build_spike(&sums)?);
        }
    }
    Ok(out)
}

fn assemble(dim: usize, neurons: Vec<NeuronSpec>, out_bias: Rational) -> Result<ReluNetwork> {
    let mut rows = Vec::with_capacity(neurons.len());
    let mut biases = Vec::with_capacity(neurons.len());
    let mut weights = Vec::with_capacity(neurons.len());
    for n in neurons {
        rows.push(n.row);
        biases.push(n.bias);
        weights.push(n.weight);
    }
    ReluNetwork::two_layer(dim, rows, biases, weights, out_bias)
}

fn labels_for(g: &ColoredGraph) -> Result<SidonLabels> {
    if g.k() == 0 {
        return input("graph has no color classes");
    }
    if let Some(c) = g.colors().iter().position(Vec::is_empty) {
        return input(format!("color class {c} is empty, so no multicolored clique exists"));
    }
    Ok(SidonLabels::partition(&g.class_sizes()))
}

/// The raw-sum network with `3(|V| + |E|)` hidden neurons.
pub fn clique_to_network(g: &ColoredGraph) -> Result<HardnessInstance> {
    let labels = labels_for(g)?;
    let network = assemble(g.k(), gadget_neurons(g, &labels, None)?, Rational::zero())?;
    Ok(HardnessInstance { network, kind: InstanceKind::RawSum, graph: g.clone(), labels, k: g.k() })
}

/// Bias-free network on `k + 1` inputs that is positive somewhere iff the
/// graph has a multicolored clique.
pub fn clique_to_positivity_instance(g: &ColoredGraph) -> Result<HardnessInstance> {
    let raw = clique_to_network(g)?;
    let shifted = raw.network.with_output_bias(Rational::one() - clique_value(g.k()));
    let network = shifted.homogenize()?;
    Ok(HardnessInstance { network, kind: InstanceKind::Positivity, ..raw })
}

/// Scaling factor for the Lipschitz instance: `1 / (2k·a_n·K)` for `p >= 1`
/// and `(p / 2K)^N / (a_n·k^N)` with `N = ⌈1/p⌉` for `p < 1`, where
/// `K = k + C(k,2)`.
pub fn lipschitz_epsilon(k: usize, max_label: u64, p: &Exponent) -> Rational {
    let big_k = clique_value(k);
    let an = qi(max_label as i64);
    let kk = qi(k as i64);
    match p {
        Exponent::Finite(p) if p < &Rational::one() => {
            let n = p.recip().ceil();
            let n: u32 = n.try_into().expect("N fits in u32");
            (p / (qi(2) * &big_k)).pow(n) / (an * kk.pow(n))
        }
        _ => Rational::one() / (qi(2) * kk * an * big_k),
    }
}

/// Network `h` and threshold `L = (K - 1/2)·ε` such that `L_p(h) >= L` is
/// meant to hold iff the graph has a multicolored clique.
pub fn clique_to_lipschitz_instance(g: &ColoredGraph, p: &Exponent) -> Result<HardnessInstance> {
    if let Exponent::Finite(v) = p {
        if !v.is_positive() {
            return input(format!("exponent must be positive, got {v}"));
        }
    }
    let labels = labels_for(g)?;
    let epsilon = lipschitz_epsilon(g.k(), labels.max_label, p);
    let threshold = (clique_value(g.k()) - q(1, 2)) * &epsilon;
    let network = assemble(g.k() + 1, gadget_neurons(g, &labels, Some(&epsilon))?, Rational::zero())?;
    Ok(HardnessInstance {
        network,
        kind: InstanceKind::Lipschitz { p: p.clone(), epsilon, threshold },
        graph: g.clone(),
        labels,
        k: g.k(),
    })
}

impl HardnessInstance {
    /// The box `[0, a_n]^k` holding every gadget's support.
    pub fn label_box(&self) -> Polyhedron {
        Polyhedron::cube(self.k, Rational::zero(), qi(self.labels.max_label as i64))
    }

    /// Input point encoding a choice of one node per color (node ids in
    /// color order): the labels, followed by `y = 1` for homogenized kinds.
    pub fn clique_point(&self, nodes: &[usize]) -> Result<RVector> {
        if nodes.len() != self.k {
            return input(format!("expected {} nodes, got {}", self.k, nodes.len()));
        }
        let mut x = Vec::with_capacity(self.k + 1);
        for (c, &v) in nodes.iter().enumerate() {
            match self.graph.slot(v) {
                Some((color, i)) if color == c => x.push(qi(self.labels.omega(c, i) as i64)),
                _ => return input(format!("node {v} is not in color class {c}")),
            }
        }
        match &self.kind {
            InstanceKind::RawSum => {}
            InstanceKind::Positivity => x.push(Rational::one()),
            InstanceKind::Lipschitz { epsilon, .. } => {
                x = x.iter().map(|v| v * epsilon).collect();
                x.push(Rational::one());
            }
        }
        Ok(x)
    }
}
