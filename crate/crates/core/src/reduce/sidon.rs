//! Greedy (Mian–Chowla) Sidon sequences.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// First `n` terms of the greedy Sidon sequence `1, 2, 4, 8, 13, 21, ...`:
/// each term is the smallest integer keeping all pairwise sums `a_i + a_j`
/// (`i <= j`) distinct.
pub fn greedy_sidon(n: usize) -> Vec<u64> {
    let mut seq: Vec<u64> = Vec::with_capacity(n);
    let mut sums: HashSet<u64> = HashSet::new();
    let mut cand = 1u64;
    while seq.len() < n {
        let fresh = seq.iter().map(|a| a + cand).chain([2 * cand]);
        let fresh: Vec<u64> = fresh.collect();
        if fresh.iter().all(|s| !sums.contains(s)) {
            sums.extend(fresh);
            seq.push(cand);
        }
        cand += 1;
    }
    assert!(is_sidon(&seq), "greedy sequence lost the Sidon property");
    seq
}

pub fn is_sidon(set: &[u64]) -> bool {
    let mut sums = HashSet::new();
    for (i, a) in set.iter().enumerate() {
        for b in &set[i..] {
            if !sums.insert(a + b) {
                return false;
            }
        }
    }
    true
}

/// Node labels drawn from a greedy Sidon sequence, one block per color class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidonLabels {
    /// `per_color[c][i]` labels the `i`-th node of color `c`
    pub per_color: Vec<Vec<u64>>,
    pub max_label: u64,
}

impl SidonLabels {
    /// Consecutive greedy terms assigned in color order.
    pub fn partition(class_sizes: &[usize]) -> Self {
        let all = greedy_sidon(class_sizes.iter().sum());
        let mut rest = &all[..];
        let per_color = class_sizes
            .iter()
            .map(|&s| {
                let (head, tail) = rest.split_at(s);
                rest = tail;
                head.to_vec()
            })
            .collect();
        SidonLabels { per_color, max_label: all.last().copied().unwrap_or(0) }
    }

    pub fn omega(&self, color: usize, index: usize) -> u64 {
        self.per_color[color][index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_next(prefix: &[u64]) -> u64 {
        (prefix.last().map_or(1, |a| a + 1)..)
            .find(|&c| {
                let mut s = prefix.to_vec();
                s.push(c);
                is_sidon(&s)
            })
            .unwrap()
    }

    #[test]
    fn known_prefixes() {
        assert_eq!(greedy_sidon(1), vec![1]);
        assert_eq!(greedy_sidon(4), vec![1, 2, 4, 8]);
        assert_eq!(greedy_sidon(5), vec![1, 2, 4, 8, 13]);
        assert_eq!(greedy_sidon(10), vec![1, 2, 4, 8, 13, 21, 31, 45, 66, 81]);
        assert!(greedy_sidon(0).is_empty());
    }

    #[test]
    fn matches_brute_force_greedy() {
        let mut prefix = vec![];
        for _ in 0..25 {
            prefix.push(brute_next(&prefix));
        }
        assert_eq!(greedy_sidon(25), prefix);
    }

    #[test]
    fn cross_sums_unique_per_color_pair() {
        let labels = SidonLabels::partition(&[3, 4, 2, 4]);
        assert_eq!(labels.max_label, *greedy_sidon(13).last().unwrap());
        for r in 0..4 {
            for l in r + 1..4 {
                let mut seen = HashSet::new();
                for a in &labels.per_color[r] {
                    for b in &labels.per_color[l] {
                        assert!(seen.insert(a + b));
                    }
                }
            }
        }
    }
}
