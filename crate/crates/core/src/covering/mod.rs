//! (r, a)-coverings from greedy maximal separated sets, their verification,
//! and shell counts around a point.

mod index;

pub(crate) use index::NeighborIndex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{distance, distance_raw, ManifoldSpec, Point, Sampler};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageCheck {
    pub covered: bool,
    pub max_gap: f64,
    pub multiplicity: usize,
    pub probes: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct CoverOptions {
    /// Stop after this many consecutive rejected proposals.
    pub rejection_budget: usize,
    pub max_nodes: usize,
    /// Monte Carlo probes for the verification stored with the covering.
    pub probes: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self {
            rejection_budget: 10_000,
            max_nodes: 250_000,
            probes: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Covering {
    pub spec: ManifoldSpec,
    pub r: f64,
    pub nodes: Vec<Point>,
    pub separation: f64,
    pub multiplicity_observed: usize,
    pub check: CoverageCheck,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Re-validates every node against the spec (used after deserializing).
    pub fn validate(&self) -> Result<()> {
        for p in &self.nodes {
            Point::from_coords(&self.spec, p.coords().to_vec())?;
        }
        if !(self.r > 0.0) {
            return Err(Error::param("covering radius must be positive"));
        }
        Ok(())
    }
}

fn probe_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Greedy r/2-separated set from uniform proposals, verified afterwards.
pub fn build_covering(spec: &ManifoldSpec, r: f64, seed: u64) -> Result<Covering> {
    build_covering_with(spec, r, seed, CoverOptions::default())
}

pub fn build_covering_with(spec: &ManifoldSpec, r: f64, seed: u64, opts: CoverOptions) -> Result<Covering> {
    if !(r > 0.0 && r <= std::f64::consts::PI) {
        return Err(Error::param(format!("covering radius must lie in (0, π], got {r}")));
    }
    let mut sampler = Sampler::new(spec, seed)?;
    let sep = 0.5 * r;
    // any maximal sep-separated set has at least 1/|B(sep)| points
    let lower = (1.0 / spec.ball_measure(sep)).ceil();
    let estimated = (0.5 / spec.ball_measure(0.5 * sep)).ceil().max(lower);
    if lower > opts.max_nodes as f64 {
        return Err(Error::BudgetExceeded {
            message: format!("covering radius {r} needs at least {lower} nodes, budget {}", opts.max_nodes),
            produced: 0,
            estimated: estimated as usize,
        });
    }
    let mut idx = NeighborIndex::new(spec, sep);
    let mut nodes = Vec::new();
    let mut rejections = 0;
    while rejections < opts.rejection_budget {
        let p = sampler.next_point();
        if idx.any_within(p.coords(), sep) {
            rejections += 1;
            continue;
        }
        rejections = 0;
        idx.insert(p.coords());
        nodes.push(p);
        if nodes.len() > opts.max_nodes {
            return Err(Error::BudgetExceeded {
                message: format!("covering radius {r} outgrew the node budget {}", opts.max_nodes),
                produced: nodes.len(),
                estimated: estimated as usize,
            });
        }
    }
    let multiplicity_observed = node_multiplicity(spec, &nodes, r);
    let check = verify_covering_seeded(spec, &nodes, r, opts.probes, probe_seed(seed))?;
    Ok(Covering {
        spec: spec.clone(),
        r,
        nodes,
        separation: sep,
        multiplicity_observed,
        check,
    })
}

fn index_of(spec: &ManifoldSpec, nodes: &[Point], radius: f64) -> NeighborIndex {
    let mut idx = NeighborIndex::new(spec, radius);
    for p in nodes {
        idx.insert(p.coords());
    }
    idx
}

/// max over nodes ω of #(nodes ∩ B(ω, r)).
pub fn node_multiplicity(spec: &ManifoldSpec, nodes: &[Point], r: f64) -> usize {
    let idx = index_of(spec, nodes, r);
    nodes
        .par_iter()
        .map(|p| idx.count_within(p.coords(), r))
        .max()
        .unwrap_or(0)
}

/// Coverage at radius `r` probed by `probes` uniform points plus the nodes.
pub fn verify_covering(spec: &ManifoldSpec, nodes: &[Point], r: f64, probes: usize) -> Result<CoverageCheck> {
    verify_covering_seeded(spec, nodes, r, probes, probe_seed(0))
}

pub fn verify_covering_seeded(
    spec: &ManifoldSpec,
    nodes: &[Point],
    r: f64,
    probes: usize,
    seed: u64,
) -> Result<CoverageCheck> {
    if probes == 0 {
        return Err(Error::param("verification needs at least one probe"));
    }
    if nodes.is_empty() {
        return Ok(CoverageCheck {
            covered: false,
            max_gap: std::f64::consts::PI,
            multiplicity: 0,
            probes,
        });
    }
    let len = spec.real_len()?;
    let idx = index_of(spec, nodes, r);
    let pts = Sampler::new(spec, seed)?.take(probes);
    let probe = |x: &[f64]| {
        let gap = match idx.nearest_nearby(x) {
            Some((_, d)) if d <= r => d,
            _ => idx.nearest_brute(x).map_or(std::f64::consts::PI, |(_, d)| d),
        };
        (gap, idx.count_within(x, r))
    };
    let (gap, mult) = pts
        .par_iter()
        .map(|p| probe(p.coords()))
        .chain(nodes.par_iter().map(|p| (0.0, idx.count_within(p.coords(), r))))
        .reduce(|| (0.0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    debug_assert_eq!(len, nodes[0].coords().len());
    Ok(CoverageCheck {
        covered: gap <= r,
        max_gap: gap,
        multiplicity: mult,
        probes,
    })
}

/// Counts of nodes in the shells kπ/n ≤ d(ω, y) < (k+1)π/n, the last shell closed.
pub fn shell_counts(spec: &ManifoldSpec, nodes: &[Point], y: &Point, n: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::param("shell count needs n >= 1"));
    }
    let mut counts = vec![0; n];
    let width = std::f64::consts::PI / n as f64;
    for p in nodes {
        let d = distance(spec, p, y)?;
        let k = ((d / width).floor() as usize).min(n - 1);
        counts[k] += 1;
    }
    Ok(counts)
}

/// #(nodes ∩ B(y, radius)).
pub fn ball_count(spec: &ManifoldSpec, nodes: &[Point], y: &Point, radius: f64) -> Result<usize> {
    let len = spec.real_len()?;
    if y.coords().len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: y.coords().len() });
    }
    Ok(nodes
        .iter()
        .filter(|p| distance_raw(spec.kind, p.coords(), y.coords()) <= radius)
        .count())
}
