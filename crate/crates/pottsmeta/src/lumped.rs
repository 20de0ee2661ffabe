// Copyright 2026 the pottsmeta authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! The colour-frequency chain: the spin dynamics watched through the
//! empirical measure is again a reversible Markov chain, a weighted
//! nearest-neighbour walk on the discrete simplex. This module enumerates
//! the lattice, evaluates the discrete free energy and assembles the
//! transition kernel.

use std::collections::HashMap;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::numeric;
use crate::simplex::LatticePoint;

/// Hard cap on the number of lattice states.
pub const LATTICE_SIZE_GUARD: f64 = 1e8;

/// The discrete simplex with adjacency, in a fixed colex order (points
/// sorted by their reversed count vector).
#[derive(Debug, Clone)]
pub struct Lattice {
    q: usize,
    n: u64,
    points: Vec<LatticePoint>,
    index: HashMap<Vec<u64>, usize>,
    /// `(neighbour index, receiving colour i, giving colour j)` per point.
    adjacency: Vec<Vec<(usize, usize, usize)>>,
}

impl Lattice {
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_sites(&self) -> u64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &LatticePoint {
        &self.points[i]
    }

    pub fn index_of(&self, counts: &[u64]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    pub fn neighbours(&self, i: usize) -> &[(usize, usize, usize)] {
        &self.adjacency[i]
    }
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Enumerate all count vectors over `q` colours summing to `n`, with the
/// complete nearest-neighbour adjacency. Errors when the state count
/// C(n+q-1, q-1) exceeds the size guard.
pub fn enumerate_lattice(n: u64, q: usize) -> Result<Lattice> {
    if n < 2 || q < 2 {
        return Err(Error::Argument("need N >= 2 and q >= 2".into()));
    }
    let size = binomial_f64(n + q as u64 - 1, q as u64 - 1);
    if size > LATTICE_SIZE_GUARD {
        return Err(Error::SizeGuard(format!(
            "lattice would have {size:.3e} states (limit {LATTICE_SIZE_GUARD:.0e})"
        )));
    }
    let mut points: Vec<Vec<u64>> = Vec::with_capacity(size as usize);
    let mut current = vec![0u64; q];
    fn rec(points: &mut Vec<Vec<u64>>, current: &mut Vec<u64>, colour: usize, remaining: u64) {
        if colour == current.len() - 1 {
            current[colour] = remaining;
            points.push(current.clone());
            return;
        }
        for c in 0..=remaining {
            current[colour] = c;
            rec(points, current, colour + 1, remaining - c);
        }
    }
    rec(&mut points, &mut current, 0, n);
    // colex: compare reversed count vectors lexicographically
    points.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));

    let index: HashMap<Vec<u64>, usize> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    let mut adjacency = Vec::with_capacity(points.len());
    for p in &points {
        let mut nbrs = Vec::new();
        for j in 0..q {
            if p[j] == 0 {
                continue;
            }
            for i in 0..q {
                if i == j {
                    continue;
                }
                let mut y = p.clone();
                y[i] += 1;
                y[j] -= 1;
                let yi = index[&y];
                nbrs.push((yi, i, j));
            }
        }
        adjacency.push(nbrs);
    }
    let points = points
        .into_iter()
        .map(|c| LatticePoint::new(c, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(Lattice {
        q,
        n,
        points,
        index,
        adjacency,
    })
}

/// The discrete free energy of the order-parameter chain,
///
/// ```text
///   F_N(x) = -||x/N||^2 / 2 + 1/(2N) - ln multinomial(N; x) / (N beta)
///            - (q-1) ln(2 pi N) / (2 N beta),
/// ```
///
/// with the multinomial evaluated through a log-factorial table.
pub fn discrete_free_energy(x: &LatticePoint, beta: f64) -> f64 {
    let table = numeric::ln_factorial_table(x.n() as usize);
    discrete_free_energy_with_table(x.counts(), x.n(), x.q(), beta, &table)
}

pub(crate) fn discrete_free_energy_with_table(
    counts: &[u64],
    n: u64,
    q: usize,
    beta: f64,
    ln_fact: &[f64],
) -> f64 {
    let nf = n as f64;
    let mut sq = 0.0;
    let mut ln_multinomial = ln_fact[n as usize];
    for &c in counts {
        let x = c as f64 / nf;
        sq += x * x;
        ln_multinomial -= ln_fact[c as usize];
    }
    -0.5 * sq + 0.5 / nf
        - ln_multinomial / (nf * beta)
        - (q as f64 - 1.0) / (2.0 * nf * beta) * (2.0 * std::f64::consts::PI * nf).ln()
}

/// One-step probability of moving a unit of mass from colour `j` to colour
/// `i`. The Metropolis exponent is assembled from integer counts before any
/// floating-point scaling: the squared-norm difference reduces to
/// `max(0, c_j - c_i - 1)` units of `2/N^2`.
pub fn transition_prob(x: &LatticePoint, i: usize, j: usize, beta: f64) -> Result<f64> {
    let q = x.q();
    if i >= q || j >= q || i == j {
        return Err(Error::Argument(format!("invalid colour pair ({i}, {j})")));
    }
    let counts = x.counts();
    if counts[j] == 0 {
        return Ok(0.0);
    }
    let n = x.n() as f64;
    let uphill_units = (counts[j] as i64 - counts[i] as i64 - 1).max(0) as f64;
    Ok(counts[j] as f64 / (n * q as f64) * (-beta * uphill_units / n).exp())
}

/// A lattice together with the reversible chain on it.
#[derive(Debug, Clone)]
pub struct LumpedChain {
    pub lattice: Lattice,
    pub chain: ChainSpec,
    pub beta: f64,
}

impl LumpedChain {
    /// State index of a count vector, as an error if absent.
    pub fn state(&self, counts: &[u64]) -> Result<usize> {
        self.lattice
            .index_of(counts)
            .ok_or_else(|| Error::Argument(format!("counts {counts:?} not on the lattice")))
    }
}

/// Assemble the order-parameter chain at `(n, q, beta)`: stationary
/// log-weights `-beta N F_N(x)` and the nearest-neighbour Metropolis
/// kernel. Construction verifies row sums and detailed balance.
pub fn build_chain(n: u64, q: usize, beta: f64) -> Result<LumpedChain> {
    if !(beta > 0.0) {
        return Err(Error::Domain("beta must be positive".into()));
    }
    let lattice = enumerate_lattice(n, q)?;
    let ln_fact = numeric::ln_factorial_table(n as usize);
    let mut log_weights = Vec::with_capacity(lattice.len());
    let mut labels = Vec::with_capacity(lattice.len());
    for p in lattice.points() {
        let f = discrete_free_energy_with_table(p.counts(), n, q, beta, &ln_fact);
        log_weights.push(-beta * n as f64 * f);
        labels.push(
            p.counts()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
    }
    let mut rows = Vec::with_capacity(lattice.len());
    for (xi, p) in lattice.points().iter().enumerate() {
        let mut row = Vec::with_capacity(lattice.neighbours(xi).len());
        for &(yi, i, j) in lattice.neighbours(xi) {
            row.push((yi, transition_prob(p, i, j, beta)?));
        }
        rows.push(row);
    }
    let chain = ChainSpec::new(labels, log_weights, rows)?;
    if !chain.is_reversible() {
        return Err(Error::Numeric(
            "lumped chain failed the detailed-balance check".into(),
        ));
    }
    Ok(LumpedChain { lattice, chain, beta })
}
