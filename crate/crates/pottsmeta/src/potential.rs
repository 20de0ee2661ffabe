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

//! Potential theory for reversible chains: equilibrium potentials via a
//! conjugate-gradient solve of the Dirichlet problem, capacities through
//! the Dirichlet form, the variational upper/lower bounds, mean hitting
//! times from the harmonic-sum-over-capacity identity, metastable
//! partitions and the computable metastability certificate.
//!
//! All stationary masses are handled in shifted units: `mu(x) =
//! exp(log_weight(x) - log_shift)`. Capacities and harmonic sums therefore
//! carry `log_shift` alongside, and the `*_log` accessors return true
//! unnormalised logarithms; hitting times are shift-free ratios.

use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::numeric;

/// Relative residual the solver tries to reach.
const CG_TARGET: f64 = 1e-14;
/// Relative residual that is still accepted at the iteration cap.
const CG_ACCEPT: f64 = 1e-10;
/// Allowed overshoot of `h` outside `[0, 1]` before it is an error.
const CLAMP_TOL: f64 = 1e-9;

/// Solution of one Dirichlet problem.
#[derive(Debug, Clone)]
pub struct PotentialSolution {
    /// Equilibrium potential: 1 on `A`, 0 on `B`, harmonic elsewhere.
    pub h: Vec<f64>,
    /// Capacity of `(A, B)` in shifted units (multiply by `exp(log_shift)`).
    pub capacity: f64,
    /// `sum_x mu(x) h(x)` in shifted units.
    pub harmonic_sum: f64,
    /// `harmonic_sum / capacity`, in steps; infinite when the capacity
    /// vanishes (disconnected pair).
    pub mean_hitting_time: f64,
    /// Relative residual of the linear solve.
    pub residual: f64,
    /// Log of the unit in which `capacity` and `harmonic_sum` are expressed.
    pub log_shift: f64,
    /// Last-exit biased starting distribution on `A`.
    pub nu: Vec<(usize, f64)>,
}

impl PotentialSolution {
    pub fn capacity_log(&self) -> f64 {
        self.capacity.ln() + self.log_shift
    }

    pub fn harmonic_sum_log(&self) -> f64 {
        self.harmonic_sum.ln() + self.log_shift
    }

    pub fn hitting_time_log(&self) -> f64 {
        self.mean_hitting_time.ln()
    }
}

/// JSON record for persisted solutions; logs only, so values stay
/// bit-meaningful at sizes where the linear scale overflows.
#[derive(Debug, Clone, Serialize)]
pub struct PotentialRecord {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub capacity_log: f64,
    pub harmonic_sum_log: f64,
    pub hitting_time_log: f64,
    pub residual: f64,
}

impl PotentialRecord {
    pub fn from_solution(a: &[usize], b: &[usize], s: &PotentialSolution) -> Self {
        Self {
            a: a.to_vec(),
            b: b.to_vec(),
            capacity_log: s.capacity_log(),
            harmonic_sum_log: s.harmonic_sum_log(),
            hitting_time_log: s.hitting_time_log(),
            residual: s.residual,
        }
    }
}

fn validate_pair(chain: &ChainSpec, a: &[usize], b: &[usize]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("A and B must be non-empty".into()));
    }
    let n = chain.n();
    let mut seen = vec![0u8; n];
    for &x in a {
        if x >= n {
            return Err(Error::Argument(format!("state {x} out of range")));
        }
        seen[x] = 1;
    }
    for &x in b {
        if x >= n {
            return Err(Error::Argument(format!("state {x} out of range")));
        }
        if seen[x] == 1 {
            return Err(Error::Argument(format!("A and B intersect at state {x}")));
        }
    }
    if !chain.is_reversible() {
        return Err(Error::Argument(
            "potential theory requires a reversible chain".into(),
        ));
    }
    Ok(())
}

/// Symmetrised conductances per undirected edge, in shifted units.
fn edge_conductances(chain: &ChainSpec, mu: &[f64]) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for x in 0..chain.n() {
        for &(y, _) in chain.row(x) {
            if x < y {
                let c = chain.conductance_shifted(mu, x, y);
                if c > 0.0 {
                    edges.push((x, y, c));
                }
            }
        }
    }
    edges
}

struct DirichletSystem {
    interior: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    rhs: Vec<f64>,
}

fn assemble(
    chain: &ChainSpec,
    edges: &[(usize, usize, f64)],
    a: &[usize],
    b: &[usize],
) -> DirichletSystem {
    let n = chain.n();
    let mut role = vec![0u8; n]; // 0 interior, 1 in A, 2 in B
    for &x in a {
        role[x] = 1;
    }
    for &x in b {
        role[x] = 2;
    }
    let mut pos = vec![usize::MAX; n];
    let mut interior = Vec::new();
    for x in 0..n {
        if role[x] == 0 {
            pos[x] = interior.len();
            interior.push(x);
        }
    }
    let m = interior.len();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for &(x, y, c) in edges {
        let (px, py) = (pos[x], pos[y]);
        if px != usize::MAX {
            diag[px] += c;
            match role[y] {
                0 => rows[px].push((py, -c)),
                1 => rhs[px] += c,
                _ => {}
            }
        }
        if py != usize::MAX {
            diag[py] += c;
            match role[x] {
                0 => rows[py].push((px, -c)),
                1 => rhs[py] += c,
                _ => {}
            }
        }
    }
    DirichletSystem {
        interior,
        rows,
        diag,
        rhs,
    }
}

/// Jacobi-preconditioned conjugate gradients on the assembled SPD system.
/// Returns `(solution, relative residual)`.
fn solve_cg(sys: &DirichletSystem) -> Result<(Vec<f64>, f64)> {
    let m = sys.interior.len();
    let b_norm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if m == 0 || b_norm == 0.0 {
        return Ok((vec![0.0; m], 0.0));
    }
    let apply = |v: &[f64], out: &mut [f64]| {
        for k in 0..m {
            let mut acc = sys.diag[k] * v[k];
            for &(j, c) in &sys.rows[k] {
                acc += c * v[j];
            }
            out[k] = acc;
        }
    };
    let inv_diag: Vec<f64> = sys
        .diag
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    let mut x = vec![0.0; m];
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; m];
    let max_iter = 50 * (m as f64).sqrt().ceil() as usize + 200;
    let mut res = 1.0;
    for _ in 0..max_iter {
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b_norm;
        if res <= CG_TARGET {
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..m {
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    if res > CG_ACCEPT {
        return Err(Error::Numeric(format!(
            "conjugate gradients stalled at relative residual {res:.3e}"
        )));
    }
    Ok((x, res))
}

/// Solve the boundary value problem for `h_{A,B}`: harmonic off `A u B`,
/// 1 on `A`, 0 on `B`. The value at a state is the probability of hitting
/// `A` before `B`. Also computes the capacity (as the Dirichlet energy of
/// `h`), the harmonic sum, the mean hitting time from the last-exit biased
/// distribution, and that distribution itself.
pub fn equilibrium_potential(
    chain: &ChainSpec,
    a: &[usize],
    b: &[usize],
) -> Result<PotentialSolution> {
    validate_pair(chain, a, b)?;
    let mu = chain.mu_shifted();
    let edges = edge_conductances(chain, &mu);
    let sys = assemble(chain, &edges, a, b);
    let (h_int, residual) = solve_cg(&sys)?;
    let n = chain.n();
    let mut h = vec![0.0; n];
    for &x in a {
        h[x] = 1.0;
    }
    for (k, &x) in sys.interior.iter().enumerate() {
        h[x] = h_int[k];
    }
    for (x, v) in h.iter_mut().enumerate() {
        if *v < -CLAMP_TOL || *v > 1.0 + CLAMP_TOL {
            return Err(Error::Numeric(format!(
                "potential out of range at state {x}: {v}"
            )));
        }
        *v = v.clamp(0.0, 1.0);
    }
    // capacity as the quadratic form: second-order accurate in the solver
    // error because the bilinear term vanishes against harmonic h
    let capacity: f64 = edges
        .iter()
        .map(|&(x, y, c)| c * (h[x] - h[y]) * (h[x] - h[y]))
        .sum();
    let harmonic_sum: f64 = mu.iter().zip(&h).map(|(m, hv)| m * hv).sum();
    // flux out of A gives the last-exit biased distribution
    let mut in_a = vec![false; n];
    for &x in a {
        in_a[x] = true;
    }
    let mut flux = vec![0.0; a.len()];
    let a_pos: std::collections::HashMap<usize, usize> =
        a.iter().enumerate().map(|(k, &x)| (x, k)).collect();
    for &(x, y, c) in &edges {
        if in_a[x] && !in_a[y] {
            flux[a_pos[&x]] += c * (1.0 - h[y]);
        } else if in_a[y] && !in_a[x] {
            flux[a_pos[&y]] += c * (1.0 - h[x]);
        }
    }
    let total_flux: f64 = flux.iter().sum();
    let nu: Vec<(usize, f64)> = if total_flux > 0.0 {
        a.iter()
            .zip(&flux)
            .map(|(&x, &f)| (x, f / total_flux))
            .collect()
    } else {
        // disconnected pair: fall back to the stationary measure on A
        let mass: f64 = a.iter().map(|&x| mu[x]).sum();
        a.iter().map(|&x| (x, mu[x] / mass)).collect()
    };
    let mean_hitting_time = if capacity > 0.0 {
        harmonic_sum / capacity
    } else {
        f64::INFINITY
    };
    Ok(PotentialSolution {
        h,
        capacity,
        harmonic_sum,
        mean_hitting_time,
        residual,
        log_shift: chain.log_shift(),
        nu,
    })
}

/// Capacity of the pair `(A, B)` in shifted units.
pub fn capacity(chain: &ChainSpec, a: &[usize], b: &[usize]) -> Result<f64> {
    Ok(equilibrium_potential(chain, a, b)?.capacity)
}

/// Mean hitting time of `B` from the last-exit biased distribution on `A`,
/// together with that distribution.
pub fn mean_hitting_time(
    chain: &ChainSpec,
    a: &[usize],
    b: &[usize],
) -> Result<(Vec<(usize, f64)>, f64)> {
    let sol = equilibrium_potential(chain, a, b)?;
    Ok((sol.nu.clone(), sol.mean_hitting_time))
}

/// Dirichlet (upper) bound: the energy of any admissible test function
/// dominates the capacity. The test must be 1 on `A`, 0 on `B` and within
/// `[0, 1]` everywhere.
pub fn dirichlet_bound(chain: &ChainSpec, a: &[usize], b: &[usize], test: &[f64]) -> Result<f64> {
    validate_pair(chain, a, b)?;
    if test.len() != chain.n() {
        return Err(Error::Argument("test vector length mismatch".into()));
    }
    for (x, &v) in test.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Argument(format!(
                "test value {v} at state {x} outside [0, 1]"
            )));
        }
    }
    for &x in a {
        if (test[x] - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(format!("test must be 1 on A (state {x})")));
        }
    }
    for &x in b {
        if test[x].abs() > 1e-12 {
            return Err(Error::Argument(format!("test must be 0 on B (state {x})")));
        }
    }
    let mu = chain.mu_shifted();
    let energy = edge_conductances(chain, &mu)
        .iter()
        .map(|&(x, y, c)| c * (test[x] - test[y]) * (test[x] - test[y]))
        .sum();
    Ok(energy)
}

/// An antisymmetric edge function given by one orientation per edge:
/// `(x, y, v)` means `flow(x, y) = v = -flow(y, x)`.
#[derive(Debug, Clone, Default)]
pub struct Flow {
    pub edges: Vec<(usize, usize, f64)>,
}

impl Flow {
    pub fn push(&mut self, x: usize, y: usize, v: f64) {
        self.edges.push((x, y, v));
    }
}

/// Thomson (lower) bound: the reciprocal energy of any unit `A,B`-flow is
/// dominated by the capacity. The flow must be divergence-free off
/// `A u B`, ship unit total flux out of `A`, and live on edges of positive
/// conductance; both admission checks hold to 1e-12 relative to the local
/// absolute flux.
pub fn thomson_bound(chain: &ChainSpec, a: &[usize], b: &[usize], flow: &Flow) -> Result<f64> {
    validate_pair(chain, a, b)?;
    let n = chain.n();
    let mu = chain.mu_shifted();
    let mut divergence = vec![0.0; n];
    let mut abs_flux = vec![0.0; n];
    let mut energy = 0.0;
    for &(x, y, v) in &flow.edges {
        if x >= n || y >= n || x == y {
            return Err(Error::Argument(format!("invalid flow edge ({x}, {y})")));
        }
        let c = chain.conductance_shifted(&mu, x, y);
        if c <= 0.0 {
            return Err(Error::Argument(format!(
                "flow on edge ({x}, {y}) with zero conductance"
            )));
        }
        divergence[x] += v;
        divergence[y] -= v;
        abs_flux[x] += v.abs();
        abs_flux[y] += v.abs();
        energy += v * v / c;
    }
    let mut role = vec![0u8; n];
    for &x in a {
        role[x] = 1;
    }
    for &x in b {
        role[x] = 2;
    }
    for (x, &d) in divergence.iter().enumerate() {
        if role[x] == 0 && d.abs() > 1e-12 * abs_flux[x].max(1.0) {
            return Err(Error::Argument(format!(
                "flow not conserved at state {x}: divergence {d:.3e}"
            )));
        }
    }
    let out_of_a: f64 = a.iter().map(|&x| divergence[x]).sum();
    let a_scale: f64 = a.iter().map(|&x| abs_flux[x]).sum::<f64>().max(1.0);
    if (out_of_a - 1.0).abs() > 1e-12 * a_scale {
        return Err(Error::Argument(format!(
            "flow ships {out_of_a} out of A, expected 1"
        )));
    }
    if energy <= 0.0 {
        return Err(Error::Argument("flow has zero energy".into()));
    }
    Ok(1.0 / energy)
}

/// The harmonic unit flow of a solved potential; plugging it into the
/// Thomson bound recovers the capacity exactly.
pub fn harmonic_flow(chain: &ChainSpec, sol: &PotentialSolution) -> Flow {
    let mu = chain.mu_shifted();
    let mut flow = Flow::default();
    for x in 0..chain.n() {
        for &(y, _) in chain.row(x) {
            if x < y {
                let c = chain.conductance_shifted(&mu, x, y);
                if c > 0.0 {
                    flow.push(x, y, c * (sol.h[x] - sol.h[y]) / sol.capacity);
                }
            }
        }
    }
    flow
}

/// Assignment of every state to the well it most likely reaches first.
#[derive(Debug, Clone, Serialize)]
pub struct MetastablePartition {
    /// Valley index per state.
    pub assignment: Vec<usize>,
    /// Log of the unnormalised stationary mass of each valley.
    pub valley_log_masses: Vec<f64>,
}

/// Partition the state space among the given disjoint wells: each state
/// goes to the well whose one-against-the-rest potential is largest there.
/// Ties go to the well of larger stationary mass, then to the smaller
/// index.
pub fn metastable_partition(chain: &ChainSpec, wells: &[Vec<usize>]) -> Result<MetastablePartition> {
    if wells.is_empty() || wells.iter().any(|m| m.is_empty()) {
        return Err(Error::Argument("wells must be non-empty".into()));
    }
    let n = chain.n();
    let mut seen = vec![false; n];
    for m in wells {
        for &x in m {
            if x >= n {
                return Err(Error::Argument(format!("state {x} out of range")));
            }
            if seen[x] {
                return Err(Error::Argument(format!("state {x} in two wells")));
            }
            seen[x] = true;
        }
    }
    let k = wells.len();
    let lw = chain.log_weights();
    let well_log_mass: Vec<f64> = wells
        .iter()
        .map(|m| numeric::log_sum_exp(&m.iter().map(|&x| lw[x]).collect::<Vec<_>>()))
        .collect();
    let potentials: Vec<Vec<f64>> = if k == 1 {
        vec![vec![1.0; n]]
    } else {
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let rest: Vec<usize> = wells
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, m)| m.iter().copied())
                .collect();
            out.push(equilibrium_potential(chain, &wells[i], &rest)?.h);
        }
        out
    };
    // precedence among tied wells: heavier first, then smaller index
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        well_log_mass[j]
            .partial_cmp(&well_log_mass[i])
            .unwrap()
            .then(i.cmp(&j))
    });
    let mut assignment = vec![0usize; n];
    for x in 0..n {
        let best = potentials
            .iter()
            .map(|h| h[x])
            .fold(f64::NEG_INFINITY, f64::max);
        for &i in &order {
            if potentials[i][x] >= best - 1e-12 {
                assignment[x] = i;
                break;
            }
        }
    }
    let mut per_valley: Vec<Vec<f64>> = vec![Vec::new(); k];
    for (x, &v) in assignment.iter().enumerate() {
        per_valley[v].push(lw[x]);
    }
    let valley_log_masses = per_valley
        .iter()
        .map(|vals| numeric::log_sum_exp(vals))
        .collect();
    Ok(MetastablePartition {
        assignment,
        valley_log_masses,
    })
}

/// The computable metastability certificate for a family of wells.
#[derive(Debug, Clone, Serialize)]
pub struct MetastabilityRatio {
    /// `numerator / denominator`; small values certify metastability.
    pub ratio: f64,
    pub log_ratio: f64,
    /// `K * max_j P[escape from well j before return]`.
    pub numerator: f64,
    /// `min over states x outside the wells of escape(x) / n_states`.
    pub denominator: f64,
    /// Index of the well achieving the numerator maximum.
    pub worst_well: usize,
    /// State achieving the denominator minimum.
    pub worst_state: usize,
}

/// Escape-rate ratio: the numerator compares each well against the union of
/// the others through capacities; the denominator relaxes the minimum over
/// arbitrary outside sets to a minimum over single states divided by the
/// state count, which lower-bounds the true quantity and therefore upper
/// bounds the certified ratio.
pub fn metastability_ratio(chain: &ChainSpec, wells: &[Vec<usize>]) -> Result<MetastabilityRatio> {
    if wells.len() < 2 {
        return Err(Error::Argument("need at least two wells".into()));
    }
    let n = chain.n();
    let mu = chain.mu_shifted();
    let k = wells.len();
    let mut numerator = f64::NEG_INFINITY;
    let mut worst_well = 0;
    for j in 0..k {
        let rest: Vec<usize> = wells
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .flat_map(|(_, m)| m.iter().copied())
            .collect();
        let cap = capacity(chain, &wells[j], &rest)?;
        let mass: f64 = wells[j].iter().map(|&x| mu[x]).sum();
        let escape = cap / mass;
        if escape > numerator {
            numerator = escape;
            worst_well = j;
        }
    }
    numerator *= k as f64;

    let mut in_wells = vec![false; n];
    for m in wells {
        for &x in m {
            in_wells[x] = true;
        }
    }
    let union: Vec<usize> = wells.iter().flat_map(|m| m.iter().copied()).collect();
    let outside: Vec<usize> = (0..n).filter(|&x| !in_wells[x]).collect();
    if outside.is_empty() {
        return Err(Error::Argument(
            "wells cover the whole state space; nothing to escape from".into(),
        ));
    }
    let escapes: Vec<Result<(usize, f64)>> = outside
        .par_iter()
        .map(|&x| {
            let cap = capacity(chain, &[x], &union)?;
            Ok((x, cap / mu[x]))
        })
        .collect();
    let mut min_escape = f64::INFINITY;
    let mut worst_state = outside[0];
    for e in escapes {
        let (x, v) = e?;
        if v < min_escape {
            min_escape = v;
            worst_state = x;
        }
    }
    let denominator = min_escape / n as f64;
    let ratio = numerator / denominator;
    Ok(MetastabilityRatio {
        ratio,
        log_ratio: ratio.ln(),
        numerator,
        denominator,
        worst_well,
        worst_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::random_reversible_chain;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_state() -> ChainSpec {
        ChainSpec::new(
            vec!["a".into(), "b".into()],
            vec![0.5f64.ln(), 0.5f64.ln()],
            vec![vec![(1, 0.3)], vec![(0, 0.3)]],
        )
        .unwrap()
    }

    /// Three-state path a - c - b with uniform weights and symmetric rates.
    fn path_chain() -> ChainSpec {
        let w = (1.0f64 / 3.0).ln();
        ChainSpec::new(
            vec!["a".into(), "c".into(), "b".into()],
            vec![w, w, w],
            vec![vec![(1, 0.4)], vec![(0, 0.4), (2, 0.4)], vec![(1, 0.4)]],
        )
        .unwrap()
    }

    /// 1-D chain with prescribed conductances along consecutive edges.
    fn conductance_path(conds: &[f64]) -> ChainSpec {
        let n = conds.len() + 1;
        // stationary weight = incident conductance sum, double it for slack
        let mut strength = vec![0.0; n];
        for (i, &c) in conds.iter().enumerate() {
            strength[i] += c;
            strength[i + 1] += c;
        }
        let weights: Vec<f64> = strength.iter().map(|s| 2.0 * s).collect();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, &c) in conds.iter().enumerate() {
            rows[i].push((i + 1, c / weights[i]));
            rows[i + 1].push((i, c / weights[i + 1]));
        }
        ChainSpec::new(
            (0..n).map(|i| i.to_string()).collect(),
            weights.iter().map(|w| w.ln()).collect(),
            rows,
        )
        .unwrap()
    }

    #[test]
    fn boundary_only_solution() {
        let sol = equilibrium_potential(&two_state(), &[0], &[1]).unwrap();
        assert_eq!(sol.h, vec![1.0, 0.0]);
        // unnormalised values: one-step escape through conductance
        // mu(a) pi(a,b) = 0.5 * 0.3
        assert!((sol.capacity_log().exp() - 0.15).abs() < 1e-15);
        assert!((sol.harmonic_sum_log().exp() - 0.5).abs() < 1e-15);
        assert!((sol.mean_hitting_time - 10.0 / 3.0).abs() < 1e-12);
        // the geometric law mean is 1/0.3
        assert!((sol.mean_hitting_time - 1.0 / 0.3).abs() < 1e-12);
    }

    #[test]
    fn midpoint_by_symmetry() {
        let sol = equilibrium_potential(&path_chain(), &[0], &[2]).unwrap();
        assert!((sol.h[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resistor_divider_on_a_path() {
        // conductances 1, 2, 3, 4 along a 5-state path; the potential drops
        // proportionally to the series resistances
        let conds = [1.0, 2.0, 3.0, 4.0];
        let chain = conductance_path(&conds);
        let sol = equilibrium_potential(&chain, &[0], &[4]).unwrap();
        let resist: Vec<f64> = conds.iter().map(|c| 1.0 / c).collect();
        let total: f64 = resist.iter().sum();
        let mut drop = 0.0;
        for k in 0..conds.len() {
            drop += resist[k];
            let expect = 1.0 - drop / total;
            assert!(
                (sol.h[k + 1] - expect).abs() < 1e-10,
                "node {}: {} vs {}",
                k + 1,
                sol.h[k + 1],
                expect
            );
        }
        // series formula for the capacity, in unnormalised units
        assert!((sol.capacity_log().exp() - 1.0 / total).abs() < 1e-10);
    }

    #[test]
    fn capacity_symmetry_and_complementarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let chain = random_reversible_chain(20, 25, &mut rng);
            let a = vec![0, 1];
            let b = vec![17, 18, 19];
            let ab = equilibrium_potential(&chain, &a, &b).unwrap();
            let ba = equilibrium_potential(&chain, &b, &a).unwrap();
            let scale = ab.capacity.max(ba.capacity);
            assert!((ab.capacity - ba.capacity).abs() <= 1e-12 * scale);
            for x in 2..17 {
                assert!((ab.h[x] + ba.h[x] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn capacity_monotone_in_the_target_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let chain = random_reversible_chain(25, 30, &mut rng);
            let c = vec![0, 1];
            let small = vec![20, 21];
            let big = vec![20, 21, 22, 23];
            let ca = capacity(&chain, &c, &small).unwrap();
            let cb = capacity(&chain, &c, &big).unwrap();
            assert!(ca <= cb * (1.0 + 1e-10));
        }
    }

    #[test]
    fn escape_probability_identity_two_state() {
        // P_{mu|A}[tau_B < tau_A] = cap / mu[A] = 0.15/0.5 = 0.3, the jump
        // probability itself
        let chain = two_state();
        let cap = capacity(&chain, &[0], &[1]).unwrap();
        let mu = chain.mu_shifted();
        assert!((cap / mu[0] - 0.3).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_bound_validates_and_dominates() {
        let chain = path_chain();
        let exact = equilibrium_potential(&chain, &[0], &[2]).unwrap();
        // the exact potential attains the infimum
        let e = dirichlet_bound(&chain, &[0], &[2], &exact.h).unwrap();
        assert!((e - exact.capacity).abs() <= 1e-10 * exact.capacity);
        // any midpoint value gives an upper bound
        for t in [0.1, 0.3, 0.7, 0.95] {
            let e = dirichlet_bound(&chain, &[0], &[2], &[1.0, t, 0.0]).unwrap();
            assert!(e >= exact.capacity - 1e-12);
        }
        assert!(dirichlet_bound(&chain, &[0], &[2], &[0.9, 0.5, 0.0]).is_err());
        assert!(dirichlet_bound(&chain, &[0], &[2], &[1.0, 1.5, 0.0]).is_err());
    }

    #[test]
    fn thomson_bound_validates_and_is_attained_by_harmonic_flow() {
        let chain = conductance_path(&[1.0, 2.0, 3.0, 4.0]);
        let sol = equilibrium_potential(&chain, &[0], &[4]).unwrap();
        let flow = harmonic_flow(&chain, &sol);
        let lower = thomson_bound(&chain, &[0], &[4], &flow).unwrap();
        assert!((lower - sol.capacity).abs() <= 1e-10 * sol.capacity);
        // a unit path flow reproduces the series formula on a path graph
        let mut path = Flow::default();
        for k in 0..4 {
            path.push(k, k + 1, 1.0);
        }
        let lower = thomson_bound(&chain, &[0], &[4], &path).unwrap();
        let series: f64 = [1.0, 2.0, 3.0, 4.0].iter().map(|c| 1.0 / c).sum();
        // the bound comes back in shifted units like the capacity
        let unnormalised = lower * sol.log_shift.exp();
        assert!((unnormalised - 1.0 / series).abs() < 1e-12);
        // non-conserved flow is rejected with the offending state
        let mut bad = Flow::default();
        bad.push(0, 1, 1.0);
        bad.push(2, 3, 1.0);
        let err = thomson_bound(&chain, &[0], &[4], &bad).unwrap_err();
        assert!(err.to_string().contains("state"));
    }

    #[test]
    fn variational_sandwich_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let chain = random_reversible_chain(20, 25, &mut rng);
            let a = vec![0];
            let b = vec![19];
            let sol = equilibrium_potential(&chain, &a, &b).unwrap();
            // random admissible tests dominate the capacity
            for _ in 0..5 {
                let test: Vec<f64> = (0..20)
                    .map(|x| {
                        if x == 0 {
                            1.0
                        } else if x == 19 {
                            0.0
                        } else {
                            rng.random::<f64>()
                        }
                    })
                    .collect();
                let e = dirichlet_bound(&chain, &a, &b, &test).unwrap();
                assert!(e >= sol.capacity * (1.0 - 1e-10));
            }
            // random path flows stay below the capacity
            for _ in 0..5 {
                // walk from 0 to 19 along the support graph
                let mut flow = Flow::default();
                let mut x = 0usize;
                let mut steps = 0;
                while x != 19 && steps < 4000 {
                    let row = chain.row(x);
                    let &(y, _) = &row[rng.random_range(0..row.len())];
                    flow.push(x, y, 1.0);
                    x = y;
                    steps += 1;
                }
                if x != 19 {
                    continue;
                }
                // cancel loops by accumulating antisymmetric edge sums
                let mut acc: std::collections::HashMap<(usize, usize), f64> =
                    std::collections::HashMap::new();
                for (u, v, w) in flow.edges {
                    let key = (u.min(v), u.max(v));
                    let signed = if u < v { w } else { -w };
                    *acc.entry(key).or_insert(0.0) += signed;
                }
                let mut clean = Flow::default();
                for ((u, v), w) in acc {
                    if w != 0.0 {
                        clean.push(u, v, w);
                    }
                }
                let lower = thomson_bound(&chain, &a, &b, &clean).unwrap();
                assert!(lower <= sol.capacity * (1.0 + 1e-10));
            }
        }
    }

    #[test]
    fn hitting_time_matches_dense_absorbing_solve() {
        // independent oracle: E_nu[tau_B] from the absorbing linear system
        // (I - P restricted off B) t = 1, solved densely
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let n = 30;
            let chain = random_reversible_chain(n, 35, &mut rng);
            let a = vec![0, 1];
            let b = vec![27, 28, 29];
            let sol = equilibrium_potential(&chain, &a, &b).unwrap();
            let keep: Vec<usize> = (0..n).filter(|x| !b.contains(x)).collect();
            let pos: std::collections::HashMap<usize, usize> =
                keep.iter().enumerate().map(|(k, &x)| (x, k)).collect();
            let m = keep.len();
            let mut mat = vec![0.0; m * m];
            let mut rhs = vec![1.0; m];
            for (k, &x) in keep.iter().enumerate() {
                mat[k * m + k] = 1.0 - chain.holding(x);
                for &(y, p) in chain.row(x) {
                    if let Some(&j) = pos.get(&y) {
                        mat[k * m + j] -= p;
                    }
                }
            }
            // dense Gaussian elimination with partial pivoting
            for col in 0..m {
                let mut piv = col;
                for r in col + 1..m {
                    if mat[r * m + col].abs() > mat[piv * m + col].abs() {
                        piv = r;
                    }
                }
                if piv != col {
                    for c in 0..m {
                        mat.swap(col * m + c, piv * m + c);
                    }
                    rhs.swap(col, piv);
                }
                let d = mat[col * m + col];
                for r in col + 1..m {
                    let f = mat[r * m + col] / d;
                    if f == 0.0 {
                        continue;
                    }
                    for c in col..m {
                        mat[r * m + c] -= f * mat[col * m + c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
            let mut t = vec![0.0; m];
            for r in (0..m).rev() {
                let mut acc = rhs[r];
                for c in r + 1..m {
                    acc -= mat[r * m + c] * t[c];
                }
                t[r] = acc / mat[r * m + r];
            }
            let oracle: f64 = sol.nu.iter().map(|&(x, w)| w * t[pos[&x]]).sum();
            let rel = (sol.mean_hitting_time - oracle).abs() / oracle;
            assert!(rel <= 1e-9, "golden formula off by {rel:.3e}");
        }
    }

    #[test]
    fn disconnected_pair_reports_infinite_time() {
        // two disjoint two-state components
        let chain = ChainSpec::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![
                vec![(1, 0.5)],
                vec![(0, 0.5)],
                vec![(3, 0.5)],
                vec![(2, 0.5)],
            ],
        )
        .unwrap();
        let sol = equilibrium_potential(&chain, &[0], &[3]).unwrap();
        assert!(sol.mean_hitting_time.is_infinite());
    }

    #[test]
    fn partition_assigns_wells_to_themselves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chain = random_reversible_chain(24, 30, &mut rng);
        let wells = vec![vec![0, 1], vec![10, 11], vec![20]];
        let part = metastable_partition(&chain, &wells).unwrap();
        for (i, m) in wells.iter().enumerate() {
            for &x in m {
                assert_eq!(part.assignment[x], i);
            }
        }
        // every state is assigned somewhere and masses add up
        let total = numeric::log_sum_exp(chain.log_weights());
        let combined = numeric::log_sum_exp(&part.valley_log_masses);
        assert!((total - combined).abs() < 1e-12);
    }

    #[test]
    fn ratio_on_two_well_birth_death_chain_decays_with_barrier() {
        // 1-D double well: V(x) = barrier * (1 - cos(2 pi k / (n-1))) style
        // tent profile with wells at the ends and a peak in the middle
        let n = 51;
        let well = |k: usize| -> f64 {
            let t = k as f64 / (n - 1) as f64;
            // double-well potential with minima at t = 0, 1 and peak 1 at t = 1/2
            1.0 - (2.0 * t - 1.0).powi(2)
        };
        let build = |beta: f64| -> ChainSpec {
            let lw: Vec<f64> = (0..n).map(|k| -beta * well(k)).collect();
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            for k in 0..n {
                if k + 1 < n {
                    rows[k].push((k + 1, 0.25 * (-beta * (well(k + 1) - well(k)).max(0.0)).exp()));
                }
                if k > 0 {
                    rows[k].push((k - 1, 0.25 * (-beta * (well(k - 1) - well(k)).max(0.0)).exp()));
                }
            }
            ChainSpec::new(
                (0..n).map(|i| i.to_string()).collect(),
                lw,
                rows,
            )
            .unwrap()
        };
        let wells = vec![vec![0usize], vec![n - 1]];
        let mut logs = Vec::new();
        let betas = [4.0, 6.0, 8.0, 10.0];
        for &beta in &betas {
            let chain = build(beta);
            let r = metastability_ratio(&chain, &wells).unwrap();
            logs.push(r.log_ratio);
        }
        // log ratio decays linearly in beta with slope close to the barrier
        let (_, slope) = numeric::linear_fit(&betas, &logs);
        assert!(
            (slope + 1.0).abs() < 0.2,
            "fitted slope {slope} not near -barrier"
        );
    }

    #[test]
    fn boundary_covers_everything() {
        // no interior states at all: the solution is the indicator of A
        let chain = path_chain();
        let sol = equilibrium_potential(&chain, &[0, 1], &[2]).unwrap();
        assert_eq!(sol.h, vec![1.0, 1.0, 0.0]);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn ratio_rejects_wells_covering_the_whole_space() {
        let chain = path_chain();
        let wells = vec![vec![0usize], vec![1], vec![2]];
        assert!(matches!(
            metastability_ratio(&chain, &wells),
            Err(Error::Argument(_))
        ));
        // and fewer than two wells is also malformed
        assert!(metastability_ratio(&chain, &[vec![0usize]]).is_err());
    }

    #[test]
    fn ratio_with_single_outside_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let chain = random_reversible_chain(10, 12, &mut rng);
        let wells: Vec<Vec<usize>> = vec![(0..5).collect(), (5..9).collect()];
        let r = metastability_ratio(&chain, &wells).unwrap();
        assert_eq!(r.worst_state, 9);
        let cap = capacity(&chain, &[9], &(0..9).collect::<Vec<_>>()).unwrap();
        let mu = chain.mu_shifted();
        assert!((r.denominator - cap / mu[9] / 10.0).abs() <= 1e-12 * r.denominator);
    }
}
