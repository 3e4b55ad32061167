//! Scaling benchmark: random generic instances over a grid of `(d, n)`,
//! one JSON Lines record each.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use zonoverify::arrangement::{Arrangement, Hyperplane};
use zonoverify::network::ReluNetwork;
use zonoverify::rational::qi;
use zonoverify::regions::linear_regions;
use zonoverify::verify::positivity;
use zonoverify::zonotope::Zonotope;
use zonoverify::Rational;

use crate::error::CliResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchKind {
    /// cells of an affine hyperplane arrangement
    Cells,
    /// vertices of a zonotope
    Vertices,
    /// positivity of a bias-free 2-layer network (counts linear regions)
    Positivity,
}

#[derive(Debug, Serialize)]
pub struct BenchRecord {
    pub kind: BenchKind,
    pub d: usize,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// closed-form count for generic input
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

pub struct BenchPlan {
    pub kind: BenchKind,
    pub d_range: (usize, usize),
    pub n_range: (usize, usize),
    pub seed: u64,
    pub max_count: usize,
    pub budget_seconds: f64,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Cells of a generic affine arrangement of `n` hyperplanes in `R^d`.
pub fn generic_cells(n: usize, d: usize) -> usize {
    (0..=d).map(|i| binom(n, i)).sum()
}

/// Vertices of a generic zonotope with `n` generators in `R^d`; also the
/// cell count of a generic central arrangement.
pub fn generic_vertices(n: usize, d: usize) -> usize {
    if n == 0 {
        return 1;
    }
    2 * (0..d).map(|i| binom(n - 1, i)).sum::<usize>()
}

fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    // wide integer range keeps random instances generic with high probability
    (0..len).map(|_| qi(rng.random_range(-1000..=1000))).collect()
}

fn nonzero_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<Rational> {
    loop {
        let v = random_vec(rng, len);
        if v.iter().any(|x| !x.is_zero()) {
            return v;
        }
    }
}

fn run_one(kind: BenchKind, d: usize, n: usize, rng: &mut ChaCha8Rng) -> CliResult<(usize, usize, Option<bool>)> {
    Ok(match kind {
        BenchKind::Cells => {
            let planes = (0..n)
                .map(|_| {
                    let normal = nonzero_vec(rng, d);
                    Hyperplane::new(normal, qi(rng.random_range(-1000..=1000)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            (Arrangement::new(d, planes)?.cells().len(), generic_cells(n, d), None)
        }
        BenchKind::Vertices => {
            let gens = (0..n).map(|_| nonzero_vec(rng, d)).collect();
            (Zonotope::new(d, gens)?.vertices().len(), generic_vertices(n, d), None)
        }
        BenchKind::Positivity => {
            let rows = (0..n).map(|_| nonzero_vec(rng, d)).collect();
            let out = (0..n).map(|_| qi(if rng.random_bool(0.5) { 1 } else { -1 })).collect();
            let net = ReluNetwork::two_layer(d, rows, vec![Rational::zero(); n], out, Rational::zero())?;
            let cells = linear_regions(&net)?.len();
            (cells, generic_vertices(n, d), Some(positivity(&net)?.holds))
        }
    })
}

fn emit(record: &BenchRecord, sink: &mut Option<std::fs::File>) -> CliResult<()> {
    let mut line = serde_json::to_string(record).expect("record serializes");
    line.push('\n');
    // one write per record keeps appends whole
    if let Some(f) = sink {
        f.write_all(line.as_bytes())?;
    }
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Runs the grid in `d`-major order, stopping with a truncation record at
/// the first point whose generic count exceeds `max_count` or once the time
/// budget is spent.
pub fn run(plan: &BenchPlan, append_to: Option<&Path>) -> CliResult<Vec<BenchRecord>> {
    let mut sink = match append_to {
        Some(p) => Some(OpenOptions::new().create(true).append(true).open(p)?),
        None => None,
    };
    let start = Instant::now();
    let mut records = Vec::new();
    'grid: for d in plan.d_range.0..=plan.d_range.1 {
        for n in plan.n_range.0..=plan.n_range.1 {
            let expected =
                if plan.kind == BenchKind::Cells { generic_cells(n, d) } else { generic_vertices(n, d) };
            let reason = if expected > plan.max_count {
                Some(format!("generic count {expected} exceeds --max-count {}", plan.max_count))
            } else if start.elapsed().as_secs_f64() > plan.budget_seconds {
                Some(format!("time budget of {}s spent", plan.budget_seconds))
            } else {
                None
            };
            if let Some(reason) = reason {
                let record = BenchRecord {
                    kind: plan.kind,
                    d,
                    n,
                    seconds: None,
                    count: None,
                    expected: Some(expected),
                    verdict: None,
                    truncated: true,
                    reason: Some(reason),
                };
                emit(&record, &mut sink)?;
                records.push(record);
                break 'grid;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(((d as u64) << 32) | n as u64);
            let t = Instant::now();
            let (count, expected, verdict) = run_one(plan.kind, d, n, &mut rng)?;
            let record = BenchRecord {
                kind: plan.kind,
                d,
                n,
                seconds: Some(t.elapsed().as_secs_f64()),
                count: Some(count),
                expected: Some(expected),
                verdict,
                truncated: false,
                reason: None,
            };
            emit(&record, &mut sink)?;
            records.push(record);
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(kind: BenchKind, d: (usize, usize), n: (usize, usize)) -> BenchPlan {
        BenchPlan { kind, d_range: d, n_range: n, seed: 7, max_count: 1_000_000, budget_seconds: 600.0 }
    }

    #[test]
    fn closed_forms() {
        for n in 2..=8 {
            assert_eq!(generic_cells(n, 2), 1 + n + n * (n - 1) / 2);
            assert_eq!(generic_vertices(n, 2), 2 * n);
        }
        assert_eq!(generic_vertices(0, 3), 1);
    }

    #[test]
    fn planar_counts_match() {
        for kind in [BenchKind::Cells, BenchKind::Vertices, BenchKind::Positivity] {
            let records = run(&plan(kind, (2, 2), (2, 8)), None).unwrap();
            assert_eq!(records.len(), 7);
            for r in &records {
                assert_eq!(r.count, r.expected, "{r:?}");
            }
        }
    }

    #[test]
    fn empty_range() {
        assert!(run(&plan(BenchKind::Cells, (3, 2), (1, 4)), None).unwrap().is_empty());
        assert!(run(&plan(BenchKind::Cells, (1, 2), (5, 4)), None).unwrap().is_empty());
    }

    #[test]
    fn guard_truncates() {
        let mut p = plan(BenchKind::Cells, (2, 2), (1, 10));
        p.max_count = 20;
        let records = run(&p, None).unwrap();
        let last = records.last().unwrap();
        assert!(last.truncated);
        assert_eq!(last.n, 6);
        assert!(records[..records.len() - 1].iter().all(|r| !r.truncated));
    }
}
