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

//! A finite reversible Markov chain: state labels, stationary weights in
//! log-scale, and a sparse row-stochastic kernel. This is the common
//! currency between the lumped order-parameter chain, the full spin chain
//! and the potential-theory engine.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric;

/// Row-sum tolerance (including the diagonal holding probability).
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Relative tolerance of the edge-wise detailed-balance check.
pub const DETAILED_BALANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ChainSpec {
    labels: Vec<String>,
    log_weights: Vec<f64>,
    /// Off-diagonal transition probabilities per row.
    rows: Vec<Vec<(usize, f64)>>,
    /// Diagonal holding probabilities.
    diag: Vec<f64>,
    /// Outcome of the detailed-balance check at construction.
    reversible: bool,
}

impl ChainSpec {
    /// Build a chain from unnormalised log-weights and off-diagonal
    /// transition probabilities. The diagonal is the remaining mass; a
    /// negative remainder signals a rate bug and is an error, as is a
    /// detailed-balance violation beyond [`DETAILED_BALANCE_TOL`].
    pub fn new(
        labels: Vec<String>,
        log_weights: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self> {
        let n = log_weights.len();
        if labels.len() != n || rows.len() != n {
            return Err(Error::Argument("labels/weights/rows length mismatch".into()));
        }
        let mut diag = vec![0.0; n];
        for (x, row) in rows.iter().enumerate() {
            let mut off = 0.0;
            for &(y, p) in row {
                if y >= n {
                    return Err(Error::Argument(format!("row {x}: state {y} out of range")));
                }
                if y == x {
                    return Err(Error::Argument(format!(
                        "row {x}: diagonal entries are implicit"
                    )));
                }
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(Error::Argument(format!(
                        "row {x}: invalid probability {p}"
                    )));
                }
                off += p;
            }
            if off > 1.0 + ROW_SUM_TOL {
                return Err(Error::Numeric(format!(
                    "row {x}: negative holding probability, off-diagonal mass {off}"
                )));
            }
            diag[x] = (1.0 - off).max(0.0);
        }
        let mut chain = Self {
            labels,
            log_weights,
            rows,
            diag,
            reversible: false,
        };
        chain.reversible = chain.check_detailed_balance(DETAILED_BALANCE_TOL);
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.log_weights.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn holding(&self, x: usize) -> f64 {
        self.diag[x]
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    /// Shift used to bring stationary weights into floating range:
    /// `mu_shifted(x) = exp(log_weight(x) - log_shift())`.
    pub fn log_shift(&self) -> f64 {
        self.log_weights
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unnormalised stationary weights divided by `exp(log_shift())`.
    pub fn mu_shifted(&self) -> Vec<f64> {
        let s = self.log_shift();
        self.log_weights.iter().map(|&w| (w - s).exp()).collect()
    }

    /// Log of the total unnormalised stationary mass.
    pub fn log_total_mass(&self) -> f64 {
        numeric::log_sum_exp(&self.log_weights)
    }

    /// Row sums including the diagonal; each must be 1 within tolerance.
    pub fn check_row_sums(&self, tol: f64) -> bool {
        self.rows.iter().zip(&self.diag).all(|(row, d)| {
            let s: f64 = d + row.iter().map(|&(_, p)| p).sum::<f64>();
            (s - 1.0).abs() <= tol
        })
    }

    /// Edge-wise detailed balance `mu(x) p(x,y) = mu(y) p(y,x)` within a
    /// relative tolerance, comparing conductances after a local shift.
    pub fn check_detailed_balance(&self, rel_tol: f64) -> bool {
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, pxy) in row {
                let pyx = self
                    .rows[y]
                    .iter()
                    .find(|&&(z, _)| z == x)
                    .map(|&(_, p)| p)
                    .unwrap_or(0.0);
                let s = self.log_weights[x].max(self.log_weights[y]);
                let a = (self.log_weights[x] - s).exp() * pxy;
                let b = (self.log_weights[y] - s).exp() * pyx;
                let scale = a.abs().max(b.abs());
                if scale > 0.0 && (a - b).abs() > rel_tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Symmetrised conductance `c(x,y) = mu(x) p(x,y)` in shifted units.
    /// Detailed balance makes the two orientations equal; averaging removes
    /// the last-bit asymmetry.
    pub fn conductance_shifted(&self, mu: &[f64], x: usize, y: usize) -> f64 {
        let pxy = self
            .rows[x]
            .iter()
            .find(|&&(z, _)| z == y)
            .map(|&(_, p)| p)
            .unwrap_or(0.0);
        let pyx = self
            .rows[y]
            .iter()
            .find(|&&(z, _)| z == x)
            .map(|&(_, p)| p)
            .unwrap_or(0.0);
        0.5 * (mu[x] * pxy + mu[y] * pyx)
    }

    /// Whether the support graph is connected (for a reversible chain this
    /// is irreducibility).
    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(y, p) in &self.rows[x] {
                if p > 0.0 && !seen[y] {
                    seen[y] = true;
                    count += 1;
                    stack.push(y);
                }
            }
        }
        count == n
    }

    /// Write the chain as an edge list: one `a b log_weight_a prob_ab` line
    /// per directed edge, after a header naming the chain parameters.
    pub fn export_edge_list<W: Write>(
        &self,
        w: &mut W,
        n_sites: u64,
        q: usize,
        beta: f64,
    ) -> Result<()> {
        writeln!(w, "# pottsmeta edge list N={n_sites} q={q} beta={beta:.17}")?;
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, p) in row {
                writeln!(w, "{x} {y} {:.17e} {p:.17e}", self.log_weights[x])?;
            }
        }
        Ok(())
    }
}

/// A random reversible chain on `n` states for tests and benchmarks: a
/// random spanning tree plus extra random edges, conductances log-uniform,
/// random lazy slack at every state.
pub fn random_reversible_chain<R: rand::Rng>(n: usize, extra_edges: usize, rng: &mut R) -> ChainSpec {
    assert!(n >= 2);
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        let c = (4.0 * rng.random::<f64>() - 2.0).exp();
        edges.push((u, v, c));
    }
    for _ in 0..extra_edges {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u != v && !edges.iter().any(|&(a, b, _)| (a, b) == (u.min(v), u.max(v))) {
            let c = (4.0 * rng.random::<f64>() - 2.0).exp();
            edges.push((u.min(v), u.max(v), c));
        }
    }
    let mut strength = vec![0.0; n];
    for &(u, v, c) in &edges {
        strength[u] += c;
        strength[v] += c;
    }
    // stationary weight = total conductance plus lazy slack
    let weights: Vec<f64> = strength
        .iter()
        .map(|&s| s * (1.0 + rng.random::<f64>()))
        .collect();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, c) in &edges {
        rows[u].push((v, c / weights[u]));
        rows[v].push((u, c / weights[v]));
    }
    let labels = (0..n).map(|i| i.to_string()).collect();
    let log_weights = weights.iter().map(|w| w.ln()).collect();
    ChainSpec::new(labels, log_weights, rows).expect("random chain construction")
}
