//! Spike and penalty gadgets: sums of three ReLU ramps forming a unit-height
//! tent around each label.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::rational::{q, qi, Rational};

/// `weight · max(0, slope · (t - knot))`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ramp {
    pub slope: Rational,
    pub knot: Rational,
    pub weight: Rational,
}

impl Ramp {
    pub fn eval(&self, t: &Rational) -> Rational {
        let z = &self.slope * (t - &self.knot);
        if z.is_positive() {
            &self.weight * z
        } else {
            Rational::zero()
        }
    }
}

pub type NeuronTriple = [Ramp; 3];

/// Tent of half-width `1/slope` peaking at 1 on `center`.
fn tent(center: u64, slope: i64) -> NeuronTriple {
    let c = qi(center as i64);
    let half = q(1, slope);
    [
        Ramp { slope: qi(slope), knot: &c - &half, weight: qi(1) },
        Ramp { slope: qi(2 * slope), knot: c.clone(), weight: qi(-1) },
        Ramp { slope: qi(slope), knot: c + half, weight: qi(1) },
    ]
}

fn distinct(labels: &[u64]) -> Result<()> {
    let mut seen = HashSet::new();
    if let Some(dup) = labels.iter().find(|l| !seen.insert(**l)) {
        return input(format!("duplicate gadget label {dup}"));
    }
    Ok(())
}

/// Edge gadget on `t = x_r + x_l`: tents of slope 4 (width 1/2) at each edge label.
pub fn build_spike(edge_labels: &[u64]) -> Result<Vec<NeuronTriple>> {
    distinct(edge_labels)?;
    Ok(edge_labels.iter().map(|&w| tent(w, 4)).collect())
}

/// Node gadget on `t = x_c`: tents of slope 8 (width 1/4) at each node label.
pub fn build_penalty(node_labels: &[u64]) -> Result<Vec<NeuronTriple>> {
    distinct(node_labels)?;
    Ok(node_labels.iter().map(|&w| tent(w, 8)).collect())
}

pub fn eval_gadget(triples: &[NeuronTriple], t: &Rational) -> Rational {
    triples.iter().flatten().map(|r| r.eval(t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn spike_examples() {
        let s = build_spike(&[5, 6, 9, 10]).unwrap();
        assert_eq!(eval_gadget(&s, &qi(5)), qi(1));
        assert_eq!(eval_gadget(&s, &qi(7)), qi(0));
        assert_eq!(eval_gadget(&s, &(qi(5) + q(1, 8))), q(1, 2));
        assert_eq!(eval_gadget(&s, &(qi(5) - q(1, 8))), q(1, 2));
        assert_eq!(eval_gadget(&s, &(qi(5) + q(1, 4))), qi(0));
        assert!(build_spike(&[5, 5]).is_err());
    }

    #[test]
    fn penalty_examples() {
        let p = build_penalty(&[4]).unwrap();
        assert_eq!(eval_gadget(&p, &qi(4)), qi(1));
        assert_eq!(eval_gadget(&p, &(qi(4) + q(1, 8))), qi(0));
        assert_eq!(eval_gadget(&p, &(qi(4) + q(1, 16))), q(1, 2));
        assert_eq!(eval_gadget(&p, &(qi(4) - q(1, 16))), q(1, 2));
        assert!(build_penalty(&[1, 2, 1]).is_err());
    }

    #[test]
    fn sharp_only_at_labels() {
        let labels = [3, 8, 11];
        let s = build_spike(&labels).unwrap();
        for t in 0..20 {
            let v = eval_gadget(&s, &qi(t));
            assert_eq!(v == qi(1), labels.contains(&(t as u64)));
            assert!(v == qi(0) || v == qi(1));
        }
    }

    proptest! {
        #[test]
        fn range_is_unit_interval(num in -200i64..400, den in 1i64..17) {
            let t = q(num, den);
            for g in [build_spike(&[2, 5, 9]).unwrap(), build_penalty(&[1, 2, 4]).unwrap()] {
                let v = eval_gadget(&g, &t);
                prop_assert!(v >= qi(0) && v <= qi(1));
            }
        }
    }
}
