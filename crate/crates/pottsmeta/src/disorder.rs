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

//! Random pair interactions of mean one: the supported laws, their
//! cumulant generating functions, the quenched-minus-annealed energy gap
//! and the uniform-gap event with its analytic tail bound.

use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::micro::ModelSpec;

/// The interaction laws, all with mean 1. The cumulant generating function
/// of the centred variable is finite on the whole line for every kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "param")]
pub enum CouplingDistribution {
    /// J = 1: the unweighted mean-field model.
    DeterministicOne,
    /// J = Bernoulli(p) / p, values in {0, 1/p}: pair interactions present
    /// with probability p, rescaled.
    ScaledBernoulli(f64),
    /// J = Poisson(p) / p: multi-edge interactions, not sub-Gaussian.
    ScaledPoisson(f64),
    /// J = Normal(1, v): partially ferromagnetic, negative values allowed.
    Gaussian(f64),
}

impl CouplingDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingDistribution::DeterministicOne => Ok(()),
            CouplingDistribution::ScaledBernoulli(p) | CouplingDistribution::ScaledPoisson(p) => {
                if p > 0.0 && p <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Argument(format!("p = {p} outside (0, 1]")))
                }
            }
            CouplingDistribution::Gaussian(v) => {
                if v > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Argument(format!("variance v = {v} must be positive")))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn variance(&self) -> f64 {
        match *self {
            CouplingDistribution::DeterministicOne => 0.0,
            CouplingDistribution::ScaledBernoulli(p) => (1.0 - p) / p,
            CouplingDistribution::ScaledPoisson(p) => 1.0 / p,
            CouplingDistribution::Gaussian(v) => v,
        }
    }

    /// Parse the command-line descriptor `one | ber:p | pois:p | gauss:v`.
    pub fn parse(text: &str) -> Result<Self> {
        let dist = if text == "one" {
            CouplingDistribution::DeterministicOne
        } else if let Some(p) = text.strip_prefix("ber:") {
            CouplingDistribution::ScaledBernoulli(
                p.parse()
                    .map_err(|_| Error::Config(format!("bad Bernoulli parameter {p}")))?,
            )
        } else if let Some(p) = text.strip_prefix("pois:") {
            CouplingDistribution::ScaledPoisson(
                p.parse()
                    .map_err(|_| Error::Config(format!("bad Poisson parameter {p}")))?,
            )
        } else if let Some(v) = text.strip_prefix("gauss:") {
            CouplingDistribution::Gaussian(
                v.parse()
                    .map_err(|_| Error::Config(format!("bad Gaussian parameter {v}")))?,
            )
        } else {
            return Err(Error::Config(format!(
                "unknown distribution descriptor '{text}' (expected one|ber:p|pois:p|gauss:v)"
            )));
        };
        dist.validate()?;
        Ok(dist)
    }

    pub fn descriptor(&self) -> String {
        match *self {
            CouplingDistribution::DeterministicOne => "one".into(),
            CouplingDistribution::ScaledBernoulli(p) => format!("ber:{p}"),
            CouplingDistribution::ScaledPoisson(p) => format!("pois:{p}"),
            CouplingDistribution::Gaussian(v) => format!("gauss:{v}"),
        }
    }

    fn sample_one<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            CouplingDistribution::DeterministicOne => 1.0,
            CouplingDistribution::ScaledBernoulli(p) => {
                if rng.random::<f64>() < p {
                    1.0 / p
                } else {
                    0.0
                }
            }
            CouplingDistribution::ScaledPoisson(p) => {
                let pois = Poisson::new(p).expect("validated parameter");
                pois.sample(rng) / p
            }
            CouplingDistribution::Gaussian(v) => {
                let z: f64 = StandardNormal.sample(rng);
                1.0 + v.sqrt() * z
            }
        }
    }
}

/// Upper-triangular array of pair couplings `J_ij`, `0 <= i < j < N`,
/// flattened row by row.
#[derive(Debug, Clone)]
pub struct CouplingArray {
    entries: Vec<f64>,
    n_sites: usize,
    dist: CouplingDistribution,
    seed: u64,
}

impl CouplingArray {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dist(&self) -> CouplingDistribution {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n_sites);
        i * (2 * self.n_sites - i - 1) / 2 + (j - i - 1)
    }

    /// Coupling between sites `i != j` (order irrelevant).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.entries[self.flat_index(a, b)]
    }

    /// Write as CSV: a header carrying the generator parameters, then one
    /// `i,j,J` line per pair.
    pub fn dump_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(
            w,
            "# couplings kind={} N={} seed={}",
            self.dist.descriptor(),
            self.n_sites,
            self.seed
        )?;
        writeln!(w, "i,j,coupling")?;
        for i in 0..self.n_sites {
            for j in (i + 1)..self.n_sites {
                writeln!(w, "{i},{j},{:.17e}", self.get(i, j))?;
            }
        }
        Ok(())
    }

    /// Read back a CSV dump produced by [`CouplingArray::dump_csv`].
    pub fn load_csv<R: BufRead>(r: &mut R) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header)?;
        let fields: std::collections::HashMap<&str, &str> = header
            .trim_start_matches('#')
            .split_whitespace()
            .filter_map(|tok| tok.split_once('='))
            .collect();
        let kind = fields
            .get("kind")
            .ok_or_else(|| Error::Config("missing kind in coupling header".into()))?;
        let dist = CouplingDistribution::parse(kind)?;
        let n_sites: usize = fields
            .get("N")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config("missing N in coupling header".into()))?;
        let seed: u64 = fields
            .get("seed")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config("missing seed in coupling header".into()))?;
        let mut entries = vec![0.0; n_sites * (n_sites - 1) / 2];
        let mut line = String::new();
        r.read_line(&mut line)?; // column header
        loop {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                break;
            }
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut parts = t.split(',');
            let i: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad coupling row '{t}'")))?;
            let j: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad coupling row '{t}'")))?;
            let v: f64 = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad coupling row '{t}'")))?;
            let idx = i * (2 * n_sites - i - 1) / 2 + (j - i - 1);
            entries[idx] = v;
        }
        Ok(Self {
            entries,
            n_sites,
            dist,
            seed,
        })
    }
}

/// Draw the i.i.d. coupling array for `n_sites` sites. The stream is a
/// counter-based generator keyed by the seed alone, so the same
/// `(dist, n_sites, seed)` always reproduces the same array bit for bit.
pub fn sample_couplings(
    dist: CouplingDistribution,
    n_sites: usize,
    seed: u64,
) -> Result<CouplingArray> {
    dist.validate()?;
    if n_sites < 2 {
        return Err(Error::Argument("need at least two sites".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = (0..n_sites * (n_sites - 1) / 2)
        .map(|_| dist.sample_one(&mut rng))
        .collect();
    Ok(CouplingArray {
        entries,
        n_sites,
        dist,
        seed,
    })
}

/// Cumulant generating function of the centred coupling `J - 1`. Finite on
/// the whole line for every supported kind (the scaled Bernoulli and
/// Poisson laws have exponential moments of all orders).
pub fn cgf(dist: CouplingDistribution, t: f64) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} outside the cgf domain")));
    }
    dist.validate()?;
    Ok(match dist {
        CouplingDistribution::DeterministicOne => 0.0,
        CouplingDistribution::ScaledBernoulli(p) => {
            // ln((1-p) + p e^{t/p}) - t, stabilised for large arguments
            let a = (1.0 - p).ln();
            let b = p.ln() + t / p;
            let m = a.max(b);
            m + ((a - m).exp() + (b - m).exp()).ln() - t
        }
        CouplingDistribution::ScaledPoisson(p) => p * ((t / p).exp() - 1.0) - t,
        CouplingDistribution::Gaussian(v) => 0.5 * v * t * t,
    })
}

/// The quenched-minus-annealed energy gap at one configuration.
pub fn delta(model: &ModelSpec, sigma: &crate::micro::Configuration) -> Result<f64> {
    if model.couplings().is_none() {
        return Err(Error::Argument("model carries no couplings".into()));
    }
    let quenched = model.hamiltonian(sigma)?;
    let annealed = crate::micro::annealed_hamiltonian(model.n_sites(), model.q(), sigma)?;
    Ok(quenched - annealed)
}

/// Monte Carlo check of the annealed-density identity
/// `E[exp(-beta Delta(sigma))] = exp(-N phi(beta/N) H_annealed(sigma))`.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub mc_mean: f64,
    pub closed_form: f64,
    pub standard_error: f64,
    pub z_score: f64,
    pub n_samples: usize,
}

pub fn annealed_identity_check(
    dist: CouplingDistribution,
    n_sites: usize,
    beta: f64,
    sigma: &crate::micro::Configuration,
    n_samples: usize,
    seed: u64,
) -> Result<IdentityReport> {
    dist.validate()?;
    if n_samples == 0 {
        return Err(Error::Argument("need at least one sample".into()));
    }
    if sigma.spins().len() != n_sites {
        return Err(Error::Argument("configuration length mismatch".into()));
    }
    // Delta(sigma) only involves the same-colour pairs
    let spins = sigma.spins();
    let mut same_pairs = 0usize;
    for i in 0..n_sites {
        for j in (i + 1)..n_sites {
            if spins[i] == spins[j] {
                same_pairs += 1;
            }
        }
    }
    let annealed = crate::micro::annealed_hamiltonian(n_sites, sigma.q(), sigma)?;
    let phi = cgf(dist, beta / n_sites as f64)?;
    let closed_form = (-(n_sites as f64) * phi * annealed).exp();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..n_samples {
        let mut acc = 0.0;
        for _ in 0..same_pairs {
            acc += dist.sample_one(&mut rng) - 1.0;
        }
        // exp(-beta Delta) with Delta = -(1/N) sum (J - 1) over same pairs
        let v = (beta * acc / n_sites as f64).exp();
        sum += v;
        sum_sq += v * v;
    }
    let mean = sum / n_samples as f64;
    let var = (sum_sq / n_samples as f64 - mean * mean).max(0.0);
    let se = (var / n_samples as f64).sqrt();
    let z = if se > 0.0 { (mean - closed_form) / se } else { 0.0 };
    Ok(IdentityReport {
        mc_mean: mean,
        closed_form,
        standard_error: se,
        z_score: z,
        n_samples,
    })
}

/// Whether the uniform energy gap stayed below `a sqrt(N)`, with the
/// analytic tail bound `2 exp(N ln q - a^2 N / v)` for comparison.
#[derive(Debug, Clone, Serialize)]
pub struct UniformGapReport {
    pub holds: bool,
    pub max_abs_gap: f64,
    pub threshold: f64,
    pub analytic_bound: f64,
    /// True when the maximum ran over every configuration; false when it is
    /// a sampled surrogate, in which case `max_abs_gap` only lower-bounds
    /// the true maximum.
    pub exact: bool,
    pub n_sampled: Option<usize>,
}

/// Evaluate the uniform-gap event for one coupling realisation. Exact
/// enumeration is used while `q^N <= 1e6`; beyond that a sampled surrogate
/// over random configurations is reported and flagged.
pub fn xi_event(model: &ModelSpec, a: f64, sample_seed: u64) -> Result<UniformGapReport> {
    if !(a > 0.0) {
        return Err(Error::Argument("need a > 0".into()));
    }
    let couplings = model
        .couplings()
        .ok_or_else(|| Error::Argument("model carries no couplings".into()))?;
    let n = model.n_sites();
    let q = model.q();
    let threshold = a * (n as f64).sqrt();
    let v = couplings.dist().variance();
    let analytic_bound = if v > 0.0 {
        2.0 * ((n as f64) * (q as f64).ln() - a * a * n as f64 / v).exp()
    } else {
        0.0
    };
    let total = (q as f64).powi(n as i32);
    let exact = total <= 1e6;
    let mut max_abs: f64 = 0.0;
    if exact {
        let mut spins = vec![0u8; n];
        loop {
            let sigma = crate::micro::Configuration::new(spins.clone(), q)?;
            let d = delta(model, &sigma)?;
            max_abs = max_abs.max(d.abs());
            // odometer increment over the configuration space
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                spins[k] += 1;
                if (spins[k] as usize) < q {
                    break;
                }
                spins[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
    } else {
        let n_samples = 20_000usize;
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        for _ in 0..n_samples {
            let spins: Vec<u8> = (0..n).map(|_| rng.random_range(0..q as u8)).collect();
            let sigma = crate::micro::Configuration::new(spins, q)?;
            max_abs = max_abs.max(delta(model, &sigma)?.abs());
        }
        return Ok(UniformGapReport {
            holds: max_abs <= threshold,
            max_abs_gap: max_abs,
            threshold,
            analytic_bound,
            exact: false,
            n_sampled: Some(n_samples),
        });
    }
    Ok(UniformGapReport {
        holds: max_abs <= threshold,
        max_abs_gap: max_abs,
        threshold,
        analytic_bound,
        exact: true,
        n_sampled: None,
    })
}
