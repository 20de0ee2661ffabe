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

//! Python extension module exposing the main pottsmeta types and
//! operations: the free-energy landscape, the order-parameter chain with
//! its potential theory, coupling laws with their concentration bounds,
//! and the seeded spin simulator.
//!
//! Structured results (regime reports, sample statistics) cross the
//! boundary as JSON strings; parse them with `json.loads`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pottsmeta::disorder::CouplingDistribution;
use pottsmeta::micro::{self, ModelSpec, StartDistribution, TransitionKind};
use pottsmeta::{concentration, disorder, landscape, lumped, potential};
use pottsmeta::{LatticePoint, SimplexPoint};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Limiting free energy at a simplex point.
#[pyfunction]
fn free_energy(x: Vec<f64>, beta: f64, q: usize) -> PyResult<f64> {
    let p = SimplexPoint::new(x).map_err(err)?;
    landscape::free_energy(&p, beta, q).map_err(err)
}

/// All one-raised-coordinate criticality solutions in [0, 1), ascending.
#[pyfunction]
fn mean_field_solutions(beta: f64, q: usize) -> PyResult<Vec<f64>> {
    landscape::mean_field_solutions(beta, q).map_err(err)
}

/// The four critical temperatures (beta1, beta2, beta3, beta4).
#[pyfunction]
fn critical_temperatures(q: usize) -> PyResult<(f64, f64, f64, f64)> {
    Ok(landscape::critical_temperatures(q).map_err(err)?.as_tuple())
}

/// Full regime report at (beta, q), as a JSON string.
#[pyfunction]
fn classify_regime(beta: f64, q: usize) -> PyResult<String> {
    let report = landscape::classify_regime(beta, q).map_err(err)?;
    serde_json::to_string(&report).map_err(err)
}

/// Nearest point of the discrete simplex, as integer counts.
#[pyfunction]
fn closest_lattice_point(x: Vec<f64>, n: u64) -> PyResult<Vec<u64>> {
    let p = SimplexPoint::new(x).map_err(err)?;
    Ok(pottsmeta::simplex::closest_lattice_point(&p, n)
        .map_err(err)?
        .counts()
        .to_vec())
}

/// Cumulant generating function of the centred coupling law.
#[pyfunction]
fn coupling_cgf(dist: &str, t: f64) -> PyResult<f64> {
    let d = CouplingDistribution::parse(dist).map_err(err)?;
    disorder::cgf(d, t).map_err(err)
}

/// Legendre transform of the symmetrised cumulant generating function.
#[pyfunction]
fn legendre(dist: &str, t: f64) -> PyResult<f64> {
    let d = CouplingDistribution::parse(dist).map_err(err)?;
    concentration::legendre(d, t).map_err(err)
}

/// One-sided Chernoff tail bounds (exact, gaussian) for an n-input
/// functional with per-input Lipschitz constant c at deviation t.
#[pyfunction]
fn chernoff_tail_bound(dist: &str, n: usize, c: f64, t: f64) -> PyResult<(f64, f64)> {
    let d = CouplingDistribution::parse(dist).map_err(err)?;
    let b = concentration::chernoff_tail_bound(d, n, c, t).map_err(err)?;
    Ok((b.legendre_exact.bound, b.gaussian_approx.bound))
}

/// Sample the upper-triangular coupling array, flattened row by row.
#[pyfunction]
fn sample_couplings(dist: &str, n_sites: usize, seed: u64) -> PyResult<Vec<f64>> {
    let d = CouplingDistribution::parse(dist).map_err(err)?;
    Ok(disorder::sample_couplings(d, n_sites, seed)
        .map_err(err)?
        .entries()
        .to_vec())
}

fn parse_transition(text: &str) -> PyResult<TransitionKind> {
    match text {
        "metastable" => Ok(TransitionKind::Metastable),
        "tunnelling" | "tunneling" => Ok(TransitionKind::Tunnelling),
        other => Err(PyValueError::new_err(format!("unknown transition '{other}'"))),
    }
}

/// The order-parameter chain at (q, N, beta) with its potential theory.
#[pyclass]
struct LumpedChain {
    inner: lumped::LumpedChain,
    q: usize,
}

#[pymethods]
impl LumpedChain {
    #[new]
    fn new(q: usize, n: u64, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: lumped::build_chain(n, q, beta).map_err(err)?,
            q,
        })
    }

    fn n_states(&self) -> usize {
        self.inner.chain.n()
    }

    /// State index of a count vector.
    fn state(&self, counts: Vec<u64>) -> PyResult<usize> {
        self.inner.state(&counts).map_err(err)
    }

    /// Anchor states of the metastable transition, as (A, B) index lists.
    fn transition_pair(&self, kind: &str) -> PyResult<(Vec<usize>, Vec<usize>)> {
        let kind = parse_transition(kind)?;
        let model = ModelSpec::new(
            self.inner.lattice.n_sites() as usize,
            self.q,
            self.inner.beta,
            None,
        )
        .map_err(err)?;
        let (a, b) = micro::transition_anchor_pair(&model, kind).map_err(err)?;
        let to_idx = |pts: Vec<LatticePoint>| -> PyResult<Vec<usize>> {
            pts.iter()
                .map(|p| self.inner.state(p.counts()).map_err(err))
                .collect()
        };
        Ok((to_idx(a)?, to_idx(b)?))
    }

    /// Log of the unnormalised capacity between two state sets.
    fn capacity_log(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
        let sol = potential::equilibrium_potential(&self.inner.chain, &a, &b).map_err(err)?;
        Ok(sol.capacity_log())
    }

    /// Log mean hitting time of B from the biased law on A.
    fn hitting_time_log(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<f64> {
        let sol = potential::equilibrium_potential(&self.inner.chain, &a, &b).map_err(err)?;
        Ok(sol.hitting_time_log())
    }

    /// Equilibrium potential vector for the pair (A, B).
    fn equilibrium_potential(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(potential::equilibrium_potential(&self.inner.chain, &a, &b)
            .map_err(err)?
            .h)
    }

    /// Write the chain as an edge-list text file.
    fn export_edges(&self, path: String) -> PyResult<()> {
        let mut file = std::fs::File::create(path)?;
        self.inner
            .chain
            .export_edge_list(
                &mut file,
                self.inner.lattice.n_sites(),
                self.q,
                self.inner.beta,
            )
            .map_err(err)
    }
}

/// Seeded Metropolis hitting-time statistics on the spin chain, returned
/// as a dict with mean, se, quantiles and censoring info.
#[pyfunction]
#[pyo3(signature = (q, n, beta, dist, seed, samples, transition="metastable", step_cap=None))]
#[allow(clippy::too_many_arguments)]
fn simulate_hitting_time<'py>(
    py: Python<'py>,
    q: usize,
    n: usize,
    beta: f64,
    dist: &str,
    seed: u64,
    samples: usize,
    transition: &str,
    step_cap: Option<u64>,
) -> PyResult<Bound<'py, PyDict>> {
    let d = CouplingDistribution::parse(dist).map_err(err)?;
    let couplings = match d {
        CouplingDistribution::DeterministicOne => None,
        _ => Some(disorder::sample_couplings(d, n, seed).map_err(err)?),
    };
    let model = ModelSpec::new(n, q, beta, couplings).map_err(err)?;
    let kind = parse_transition(transition)?;
    let (a, b) = micro::transition_anchor_pair(&model, kind).map_err(err)?;
    let start = StartDistribution::UniformOnCounts(a[0].clone());
    let stats =
        micro::simulate_hitting_time(&model, &start, &b, seed, samples, step_cap).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("seed", stats.seed)?;
    out.set_item("n", stats.n)?;
    out.set_item("mean", stats.mean)?;
    out.set_item("se", stats.se)?;
    out.set_item("q05", stats.q05)?;
    out.set_item("q50", stats.q50)?;
    out.set_item("q95", stats.q95)?;
    out.set_item("censored_count", stats.censored_count)?;
    Ok(out)
}

#[pymodule]
fn pottsmeta_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(mean_field_solutions, m)?)?;
    m.add_function(wrap_pyfunction!(critical_temperatures, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(closest_lattice_point, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_cgf, m)?)?;
    m.add_function(wrap_pyfunction!(legendre, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_tail_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sample_couplings, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_hitting_time, m)?)?;
    m.add_class::<LumpedChain>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
