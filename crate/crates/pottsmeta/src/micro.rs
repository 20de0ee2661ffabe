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

//! The full spin model: Hamiltonians (pairwise and order-parameter forms),
//! the single-flip Metropolis kernel for exactly solvable sizes, the
//! metastable sets attached to the landscape minima, and a seeded Monte
//! Carlo hitting-time sampler with incremental energy bookkeeping.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::ChainSpec;
use crate::disorder::CouplingArray;
use crate::error::{Error, Result};
use crate::landscape;
use crate::simplex::{closest_lattice_point, LatticePoint};

/// Exact-kernel guard: `q^N` states at most.
pub const KERNEL_SIZE_GUARD: f64 = 1e6;
/// Default per-sample step budget of the simulator.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// A spin assignment; colours are stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    spins: Vec<u8>,
    q: usize,
}

impl Configuration {
    pub fn new(spins: Vec<u8>, q: usize) -> Result<Self> {
        if q < 2 || q > u8::MAX as usize {
            return Err(Error::Argument(format!("unsupported colour count {q}")));
        }
        if spins.iter().any(|&s| s as usize >= q) {
            return Err(Error::Argument("spin value out of colour range".into()));
        }
        Ok(Self { spins, q })
    }

    pub fn spins(&self) -> &[u8] {
        &self.spins
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Colour counts over the sites.
    pub fn empirical_measure(&self) -> LatticePoint {
        let mut counts = vec![0u64; self.q];
        for &s in &self.spins {
            counts[s as usize] += 1;
        }
        LatticePoint::new(counts, self.spins.len() as u64).expect("counts sum to N")
    }
}

/// Model parameters; absent couplings mean the plain mean-field model
/// (every `J = 1`).
#[derive(Debug, Clone)]
pub struct ModelSpec {
    n_sites: usize,
    q: usize,
    beta: f64,
    couplings: Option<CouplingArray>,
}

impl ModelSpec {
    pub fn new(n_sites: usize, q: usize, beta: f64, couplings: Option<CouplingArray>) -> Result<Self> {
        // N = 1 is admitted as the degenerate pairless system
        if n_sites == 0 || q < 2 {
            return Err(Error::Argument("need N >= 1 and q >= 2".into()));
        }
        if !(beta >= 0.0) {
            return Err(Error::Domain("beta must be non-negative".into()));
        }
        if let Some(arr) = &couplings {
            if arr.n_sites() != n_sites {
                return Err(Error::Argument(format!(
                    "coupling array is for {} sites, model has {n_sites}",
                    arr.n_sites()
                )));
            }
        }
        Ok(Self {
            n_sites,
            q,
            beta,
            couplings,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn couplings(&self) -> Option<&CouplingArray> {
        self.couplings.as_ref()
    }

    /// Energy of a configuration: the coupling-weighted count of aligned
    /// pairs over `N` when couplings are present, the order-parameter form
    /// otherwise.
    pub fn hamiltonian(&self, sigma: &Configuration) -> Result<f64> {
        if sigma.spins().len() != self.n_sites || sigma.q() != self.q {
            return Err(Error::Argument("configuration does not fit the model".into()));
        }
        match &self.couplings {
            None => annealed_hamiltonian(self.n_sites, self.q, sigma),
            Some(arr) => {
                let spins = sigma.spins();
                let mut acc = 0.0;
                for i in 0..self.n_sites {
                    for j in (i + 1)..self.n_sites {
                        if spins[i] == spins[j] {
                            acc += arr.get(i, j);
                        }
                    }
                }
                Ok(-acc / self.n_sites as f64)
            }
        }
    }
}

/// The mean-field energy through the empirical measure:
/// `-N ||L(sigma)||^2 / 2 + 1/2`.
pub fn annealed_hamiltonian(n_sites: usize, q: usize, sigma: &Configuration) -> Result<f64> {
    if sigma.spins().len() != n_sites || sigma.q() != q {
        return Err(Error::Argument("configuration does not fit the model".into()));
    }
    let counts = sigma.empirical_measure();
    let nf = n_sites as f64;
    let sq: f64 = counts
        .counts()
        .iter()
        .map(|&c| (c as f64 / nf) * (c as f64 / nf))
        .sum();
    Ok(-nf / 2.0 * sq + 0.5)
}

/// State index of a configuration in the exact kernel's ordering.
pub fn config_index(spins: &[u8], q: usize) -> usize {
    let mut idx = 0usize;
    for &s in spins.iter().rev() {
        idx = idx * q + s as usize;
    }
    idx
}

/// Configuration at a state index of the exact kernel.
pub fn index_config(mut idx: usize, n: usize, q: usize) -> Vec<u8> {
    let mut spins = vec![0u8; n];
    for s in spins.iter_mut() {
        *s = (idx % q) as u8;
        idx /= q;
    }
    spins
}

/// The single-flip Metropolis chain over all `q^N` configurations:
/// proposals pick a (site, colour) pair uniformly among `N q` (the current
/// colour included, which contributes the lazy part of the diagonal), and
/// moves uphill in energy are damped by `exp(-beta [dH]+)`. Stationary
/// log-weights are `-beta H`.
pub fn metropolis_kernel(model: &ModelSpec) -> Result<ChainSpec> {
    let n = model.n_sites();
    let q = model.q();
    let total = (q as f64).powi(n as i32);
    if total > KERNEL_SIZE_GUARD {
        return Err(Error::SizeGuard(format!(
            "q^N = {total:.3e} exceeds the exact-kernel limit {KERNEL_SIZE_GUARD:.0e}"
        )));
    }
    let n_states = total as usize;
    let mut energies = vec![0.0; n_states];
    for (idx, e) in energies.iter_mut().enumerate() {
        let spins = index_config(idx, n, q);
        let sigma = Configuration::new(spins, q)?;
        *e = model.hamiltonian(&sigma)?;
    }
    let beta = model.beta();
    let rate = 1.0 / (n as f64 * q as f64);
    let mut labels = Vec::with_capacity(n_states);
    let mut rows = Vec::with_capacity(n_states);
    let mut stride = vec![0usize; n];
    for (k, s) in stride.iter_mut().enumerate() {
        *s = q.pow(k as u32);
    }
    for idx in 0..n_states {
        let spins = index_config(idx, n, q);
        labels.push(spins.iter().map(|s| s.to_string()).collect::<String>());
        let mut row = Vec::with_capacity(n * (q - 1));
        for (site, &cur) in spins.iter().enumerate() {
            for colour in 0..q as u8 {
                if colour == cur {
                    continue;
                }
                let neighbour =
                    (idx as i64 + (colour as i64 - cur as i64) * stride[site] as i64) as usize;
                let dh = energies[neighbour] - energies[idx];
                row.push((neighbour, rate * (-beta * dh.max(0.0)).exp()));
            }
        }
        rows.push(row);
    }
    let log_weights: Vec<f64> = energies.iter().map(|&e| -beta * e).collect();
    let chain = ChainSpec::new(labels, log_weights, rows)?;
    if !chain.is_reversible() {
        return Err(Error::Numeric(
            "spin kernel failed the detailed-balance check".into(),
        ));
    }
    Ok(chain)
}

/// All configurations whose empirical measure equals the given counts,
/// as indices into the exact kernel's state order.
pub fn fibre(n: usize, q: usize, counts: &[u64]) -> Result<Vec<usize>> {
    let total = (q as f64).powi(n as i32);
    if total > KERNEL_SIZE_GUARD {
        return Err(Error::SizeGuard(format!(
            "q^N = {total:.3e} exceeds the exact-kernel limit"
        )));
    }
    if counts.len() != q || counts.iter().sum::<u64>() != n as u64 {
        return Err(Error::Argument("counts do not describe a fibre".into()));
    }
    let n_states = total as usize;
    let mut out = Vec::new();
    let mut tally = vec![0u64; q];
    for idx in 0..n_states {
        let spins = index_config(idx, n, q);
        tally.iter_mut().for_each(|t| *t = 0);
        for &s in &spins {
            tally[s as usize] += 1;
        }
        if tally == counts {
            out.push(idx);
        }
    }
    Ok(out)
}

/// Which transition a hitting experiment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    /// From the shallower wells to the deeper ones, direction set by beta.
    Metastable,
    /// Between symmetric coloured wells (first against the rest).
    Tunnelling,
}

/// The metastable structure of a model: the lattice anchor points of the
/// wells and, for exactly solvable sizes, the configuration fibres.
#[derive(Debug, Clone)]
pub struct MetastableSets {
    /// Well labels: index 0 is the barycentre well when present, coloured
    /// wells follow in colour order.
    pub anchors: Vec<LatticePoint>,
    /// True when the barycentre well is part of the family.
    pub includes_uniform: bool,
}

/// Lattice anchor points of the metastable wells at `(beta, q, N)`:
/// closest lattice approximations of the free-energy minima. The
/// barycentre belongs to the family only below the stability edge
/// `beta = q`.
pub fn metastable_anchors(model: &ModelSpec) -> Result<MetastableSets> {
    let q = model.q();
    let beta = model.beta();
    let temps = landscape::critical_temperatures(q)?;
    if beta <= temps.beta1 {
        return Err(Error::Argument(format!(
            "no metastable structure at beta = {beta} <= beta1 = {}",
            temps.beta1
        )));
    }
    let minima = landscape::minima(beta, q)?;
    let n = model.n_sites() as u64;
    let mut anchors = Vec::new();
    let mut includes_uniform = false;
    if let Some(m0) = minima
        .iter()
        .find(|p| p.label == landscape::PointLabel::Uniform)
    {
        anchors.push(closest_lattice_point(&m0.location, n)?);
        includes_uniform = true;
    }
    for i in 0..q {
        let mi = minima
            .iter()
            .find(|p| p.label == landscape::PointLabel::Coloured(i))
            .ok_or_else(|| {
                Error::Numeric(format!("coloured minimum {i} missing at beta = {beta}"))
            })?;
        anchors.push(closest_lattice_point(&mi.location, n)?);
    }
    Ok(MetastableSets {
        anchors,
        includes_uniform,
    })
}

/// The `(A, B)` pair of lattice anchors for a transition kind, following
/// the regime: below the equal-depth temperature the coloured wells are
/// the shallow side and the barycentre the deep one; above it the roles
/// swap; tunnelling runs from the first coloured well to the others and
/// needs `beta` past the equal-depth point.
pub fn transition_anchor_pair(
    model: &ModelSpec,
    kind: TransitionKind,
) -> Result<(Vec<LatticePoint>, Vec<LatticePoint>)> {
    let temps = landscape::critical_temperatures(model.q())?;
    let beta = model.beta();
    let sets = metastable_anchors(model)?;
    match kind {
        TransitionKind::Metastable => {
            if !sets.includes_uniform {
                return Err(Error::Argument(format!(
                    "no barycentre well at beta = {beta} >= beta4 = {}; only tunnelling remains",
                    temps.beta4
                )));
            }
            let uniform = vec![sets.anchors[0].clone()];
            let coloured = sets.anchors[1..].to_vec();
            if beta <= temps.beta2 {
                Ok((coloured, uniform))
            } else {
                Ok((uniform, coloured))
            }
        }
        TransitionKind::Tunnelling => {
            if beta <= temps.beta2 {
                return Err(Error::Argument(format!(
                    "tunnelling requires beta > beta2 = {}",
                    temps.beta2
                )));
            }
            let offset = if sets.includes_uniform { 1 } else { 0 };
            let first = vec![sets.anchors[offset].clone()];
            let rest = sets.anchors[offset + 1..].to_vec();
            Ok((first, rest))
        }
    }
}

/// Same pair as configuration fibres (exactly solvable sizes only).
pub fn transition_fibre_pair(
    model: &ModelSpec,
    kind: TransitionKind,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (a, b) = transition_anchor_pair(model, kind)?;
    let mut af = Vec::new();
    for p in &a {
        af.extend(fibre(model.n_sites(), model.q(), p.counts())?);
    }
    let mut bf = Vec::new();
    for p in &b {
        bf.extend(fibre(model.n_sites(), model.q(), p.counts())?);
    }
    Ok((af, bf))
}

/// A starting law for the simulator.
#[derive(Debug, Clone)]
pub enum StartDistribution {
    /// A single configuration.
    Fixed(Configuration),
    /// A finite weighted mixture (weights need not be normalised).
    Weighted(Vec<(Configuration, f64)>),
    /// Uniform over the configurations with the given colour counts; drawn
    /// by shuffling the colour multiset, so it scales to large N.
    UniformOnCounts(LatticePoint),
}

/// Summary statistics of a batch of simulated hitting times.
#[derive(Debug, Clone, Serialize)]
pub struct SampleStats {
    pub seed: u64,
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    pub q05: u64,
    pub q50: u64,
    pub q95: u64,
    pub censored_count: usize,
    pub step_cap: u64,
}

struct SpinSampler<'a> {
    model: &'a ModelSpec,
    spins: Vec<u8>,
    counts: Vec<u64>,
    /// Coupling-weighted number of same-colour partners per (site, colour);
    /// used only in the quenched case.
    partner_weight: Vec<f64>,
    energy: f64,
}

impl<'a> SpinSampler<'a> {
    fn new(model: &'a ModelSpec, start: &Configuration) -> Result<Self> {
        let n = model.n_sites();
        let q = model.q();
        let spins = start.spins().to_vec();
        let mut counts = vec![0u64; q];
        for &s in &spins {
            counts[s as usize] += 1;
        }
        let mut partner_weight = Vec::new();
        if let Some(arr) = model.couplings() {
            partner_weight = vec![0.0; n * q];
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    partner_weight[i * q + spins[j] as usize] += arr.get(i, j);
                }
            }
        }
        let energy = model.hamiltonian(start)?;
        Ok(Self {
            model,
            spins,
            counts,
            partner_weight,
            energy,
        })
    }

    /// Energy change of recolouring `site` to `colour`.
    fn delta_h(&self, site: usize, colour: u8) -> f64 {
        let cur = self.spins[site];
        if cur == colour {
            return 0.0;
        }
        let n = self.model.n_sites() as f64;
        match self.model.couplings() {
            None => {
                // aligned-partner counts follow from the colour tallies
                let gain = self.counts[colour as usize] as f64;
                let loss = self.counts[cur as usize] as f64 - 1.0;
                -(gain - loss) / n
            }
            Some(_) => {
                let q = self.model.q();
                let w = &self.partner_weight;
                -(w[site * q + colour as usize] - w[site * q + cur as usize]) / n
            }
        }
    }

    fn apply(&mut self, site: usize, colour: u8, dh: f64) {
        let cur = self.spins[site];
        if cur == colour {
            return;
        }
        if let Some(arr) = self.model.couplings() {
            let q = self.model.q();
            for j in 0..self.model.n_sites() {
                if j == site {
                    continue;
                }
                let jw = arr.get(site, j);
                self.partner_weight[j * q + cur as usize] -= jw;
                self.partner_weight[j * q + colour as usize] += jw;
            }
        }
        self.counts[cur as usize] -= 1;
        self.counts[colour as usize] += 1;
        self.spins[site] = colour;
        self.energy += dh;
    }

    fn energy_from_scratch(&self) -> Result<f64> {
        let sigma = Configuration::new(self.spins.clone(), self.model.q())?;
        self.model.hamiltonian(&sigma)
    }
}

fn draw_start<R: Rng>(start: &StartDistribution, rng: &mut R) -> Result<Configuration> {
    match start {
        StartDistribution::Fixed(c) => Ok(c.clone()),
        StartDistribution::Weighted(items) => {
            if items.is_empty() {
                return Err(Error::Argument("empty starting distribution".into()));
            }
            let total: f64 = items.iter().map(|(_, w)| w).sum();
            if !(total > 0.0) {
                return Err(Error::Argument("starting weights must be positive".into()));
            }
            let mut u = rng.random::<f64>() * total;
            for (c, w) in items {
                u -= w;
                if u <= 0.0 {
                    return Ok(c.clone());
                }
            }
            Ok(items.last().unwrap().0.clone())
        }
        StartDistribution::UniformOnCounts(point) => {
            let mut spins = Vec::with_capacity(point.n() as usize);
            for (colour, &count) in point.counts().iter().enumerate() {
                spins.extend(std::iter::repeat_n(colour as u8, count as usize));
            }
            // Fisher-Yates
            for i in (1..spins.len()).rev() {
                let j = rng.random_range(0..=i);
                spins.swap(i, j);
            }
            Configuration::new(spins, point.q())
        }
    }
}

/// Run seeded single-flip Metropolis until the empirical measure enters
/// one of the target count vectors, independently `n_samples` times.
///
/// The generator is ChaCha8, a counter-based stream cipher: sample `k`
/// runs on stream `k + 1` of the base seed, so results are reproducible
/// bit for bit across platforms and regardless of the number of worker
/// threads. Energy bookkeeping is incremental (colour
/// tallies for the plain model, per-site weighted partner counts for the
/// quenched one) and cross-checked against a from-scratch evaluation every
/// 10^4 steps. Samples that exhaust the step budget are recorded at the
/// cap and counted in `censored_count`, never dropped.
pub fn simulate_hitting_time(
    model: &ModelSpec,
    start: &StartDistribution,
    targets: &[LatticePoint],
    seed: u64,
    n_samples: usize,
    step_cap: Option<u64>,
) -> Result<SampleStats> {
    if n_samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    if targets.is_empty() {
        return Err(Error::Argument("need at least one target".into()));
    }
    for t in targets {
        if t.q() != model.q() || t.n() != model.n_sites() as u64 {
            return Err(Error::Argument("target counts do not fit the model".into()));
        }
    }
    let cap = step_cap.unwrap_or(DEFAULT_STEP_CAP);
    let target_counts: Vec<Vec<u64>> = targets.iter().map(|t| t.counts().to_vec()).collect();
    let results: Vec<Result<(u64, bool)>> = (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            let start_config = draw_start(start, &mut rng)?;
            let mut sampler = SpinSampler::new(model, &start_config)?;
            let n = model.n_sites();
            let q = model.q();
            let beta = model.beta();
            let mut steps: u64 = 0;
            // first-return semantics: a lazy step from inside the target
            // set counts as a hit at time 1
            let mut in_target = target_counts.iter().any(|t| t[..] == sampler.counts[..]);
            loop {
                if steps >= cap {
                    return Ok((cap, true));
                }
                // uniform proposal over (site, colour), self-colour allowed
                let site = rng.random_range(0..n);
                let colour = rng.random_range(0..q) as u8;
                steps += 1;
                if colour != sampler.spins[site] {
                    let dh = sampler.delta_h(site, colour);
                    let accept = dh <= 0.0 || rng.random::<f64>() < (-beta * dh).exp();
                    if accept {
                        sampler.apply(site, colour, dh);
                        in_target = target_counts.iter().any(|t| t[..] == sampler.counts[..]);
                    }
                }
                if in_target {
                    return Ok((steps, false));
                }
                if steps % 10_000 == 0 {
                    let fresh = sampler.energy_from_scratch()?;
                    if (fresh - sampler.energy).abs() > 1e-9 * (1.0 + fresh.abs()) {
                        return Err(Error::Numeric(format!(
                            "incremental energy drifted: {} vs {fresh}",
                            sampler.energy
                        )));
                    }
                    sampler.energy = fresh;
                }
            }
        })
        .collect();
    let mut times = Vec::with_capacity(n_samples);
    let mut censored = 0usize;
    for r in results {
        let (t, was_censored) = r?;
        if was_censored {
            censored += 1;
        }
        times.push(t);
    }
    times.sort_unstable();
    let quantile = |p: f64| -> u64 {
        let idx = ((times.len() as f64 - 1.0) * p).round() as usize;
        times[idx]
    };
    let vals: Vec<f64> = times.iter().map(|&t| t as f64).collect();
    let (mean, se) = crate::numeric::mean_se(&vals);
    Ok(SampleStats {
        seed,
        n: n_samples,
        mean,
        se,
        q05: quantile(0.05),
        q50: quantile(0.50),
        q95: quantile(0.95),
        censored_count: censored,
        step_cap: cap,
    })
}
