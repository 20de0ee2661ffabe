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

//! Chernoff-type concentration machinery for Lipschitz functionals of the
//! coupling array, and the empirical harness that verifies the
//! concentration and annealed-comparison statements on exactly solvable
//! quenched ensembles.
//!
//! A functional with per-coupling Lipschitz constant `C` over `n`
//! independent couplings concentrates like
//! `P[|f - E f| > t] <= 2 exp(-n phi1*(t / (C n)))`, with `phi1` the
//! symmetrised cumulant generating function of one coupling and `phi1*`
//! its Legendre transform; the small-deviation face of that bound is the
//! Gaussian form `2 exp(-t^2 / (4 v C^2 n))`.

use rayon::prelude::*;
use serde::Serialize;

use crate::disorder::{self, CouplingDistribution};
use crate::error::{Error, Result};
use crate::micro::{self, ModelSpec, TransitionKind};
use crate::numeric;
use crate::potential;

/// `phi1(lambda)`: cumulant generating function of the difference of two
/// independent centred couplings, `phi(lambda) + phi(-lambda)`. Even, zero
/// at zero, with second derivative twice the coupling variance.
pub fn symmetrized_cgf(dist: CouplingDistribution, lambda: f64) -> Result<f64> {
    Ok(disorder::cgf(dist, lambda)? + disorder::cgf(dist, -lambda)?)
}

/// Legendre transform `phi1*(t) = sup_{lambda >= 0} (t lambda -
/// phi1(lambda))`, by bracket growth, golden-section search and a few
/// Newton polishing steps on the stationarity condition.
pub fn legendre(dist: CouplingDistribution, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Argument("need t >= 0".into()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if dist.variance() == 0.0 {
        return Err(Error::Numeric(
            "supremum unbounded: degenerate coupling has a flat cgf".into(),
        ));
    }
    let objective = |l: f64| -> f64 { t * l - symmetrized_cgf(dist, l).unwrap() };
    // grow the bracket until the objective turns down
    let mut hi = 1.0;
    let mut grow = 0;
    while objective(hi * 1.5) > objective(hi) {
        hi *= 1.5;
        grow += 1;
        if grow > 200 {
            return Err(Error::Numeric("supremum did not turn over".into()));
        }
    }
    let (mut lam, _) = numeric::golden_min(|l| -objective(l), 0.0, hi * 1.5, 1e-12);
    // Newton polish on phi1'(lambda) = t with numerical derivatives
    for _ in 0..4 {
        let h = (1e-6 * lam.abs()).max(1e-9);
        let d1 = (symmetrized_cgf(dist, lam + h)? - symmetrized_cgf(dist, lam - h)?) / (2.0 * h);
        let d2 = (symmetrized_cgf(dist, lam + h)? - 2.0 * symmetrized_cgf(dist, lam)?
            + symmetrized_cgf(dist, lam - h)?)
            / (h * h);
        if d2 <= 0.0 {
            break;
        }
        let step = (d1 - t) / d2;
        let next = lam - step;
        if next.is_finite() && next >= 0.0 {
            lam = next;
        } else {
            break;
        }
    }
    Ok(objective(lam.max(0.0)))
}

/// Which analytic form a bound value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundForm {
    LegendreExact,
    GaussianApprox,
}

/// A one-sided tail probability bound for an `n`-input Lipschitz
/// functional at deviation `t`.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationBound {
    pub t: f64,
    pub n: usize,
    pub lipschitz: f64,
    /// One-sided bound value in (0, 1].
    pub bound: f64,
    pub form: BoundForm,
}

impl ConcentrationBound {
    /// The two-sided version (may exceed 1, in which case it is vacuous).
    pub fn two_sided(&self) -> f64 {
        2.0 * self.bound
    }
}

/// Both forms of the tail bound at deviation `t` for a functional of `n`
/// i.i.d. couplings with per-coordinate Lipschitz constant `c`.
#[derive(Debug, Clone, Serialize)]
pub struct ChernoffBounds {
    pub legendre_exact: ConcentrationBound,
    pub gaussian_approx: ConcentrationBound,
}

pub fn chernoff_tail_bound(
    dist: CouplingDistribution,
    n: usize,
    c: f64,
    t: f64,
) -> Result<ChernoffBounds> {
    if n == 0 || !(c > 0.0) {
        return Err(Error::Argument("need n >= 1 and C > 0".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::Argument("need t >= 0".into()));
    }
    let v = dist.variance();
    let exact = if t == 0.0 {
        1.0
    } else if v == 0.0 {
        0.0
    } else {
        (-(n as f64) * legendre(dist, t / (c * n as f64))?).exp()
    };
    let gaussian = if t == 0.0 {
        1.0
    } else if v == 0.0 {
        0.0
    } else {
        (-t * t / (4.0 * v * c * c * n as f64)).exp()
    };
    Ok(ChernoffBounds {
        legendre_exact: ConcentrationBound {
            t,
            n,
            lipschitz: c,
            bound: exact,
            form: BoundForm::LegendreExact,
        },
        gaussian_approx: ConcentrationBound {
            t,
            n,
            lipschitz: c,
            bound: gaussian,
            form: BoundForm::GaussianApprox,
        },
    })
}

/// The quenched functionals the harness tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailFunctional {
    LogZCapacity,
    LogHarmonicSum,
    LogHittingTime,
}

impl TailFunctional {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "log_z_capacity" => Ok(Self::LogZCapacity),
            "log_harmonic_sum" => Ok(Self::LogHarmonicSum),
            "log_hitting_time" => Ok(Self::LogHittingTime),
            other => Err(Error::Config(format!("unknown functional '{other}'"))),
        }
    }

    /// Per-coupling Lipschitz constant of the functional, as a multiple of
    /// `beta / N`: 1 for the capacity and harmonic sum, 2 for the hitting
    /// time (a ratio of the two).
    pub fn lipschitz_factor(&self) -> f64 {
        match self {
            TailFunctional::LogZCapacity | TailFunctional::LogHarmonicSum => 1.0,
            TailFunctional::LogHittingTime => 2.0,
        }
    }
}

/// Parameters of a quenched ensemble run on the exactly solvable spin chain.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleConfig {
    pub q: usize,
    pub n_sites: usize,
    pub beta: f64,
    pub dist: CouplingDistribution,
    pub n_realizations: usize,
    pub seed: u64,
    pub transition: TransitionKind,
    /// Threshold multiplier of the uniform-gap event; the event compares
    /// the max energy gap against `a sqrt(N)`.
    pub gap_threshold_a: f64,
}

impl EnsembleConfig {
    /// The threshold used when none is supplied: twice the critical value
    /// `sqrt(v ln q)` above which the gap event is overwhelmingly likely.
    pub fn default_gap_threshold(dist: CouplingDistribution, q: usize) -> f64 {
        2.0 * (dist.variance().max(f64::MIN_POSITIVE) * (q as f64).ln()).sqrt()
    }
}

/// Exact quenched quantities of one coupling realisation.
#[derive(Debug, Clone, Serialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub coupling_seed: u64,
    pub log_z_capacity: f64,
    pub log_z_harmonic_sum: f64,
    pub log_hitting_time: f64,
    /// Uniform-gap event indicator for this realisation.
    pub gap_event_holds: bool,
    /// Harmonic sum over the stationary mass of the starting valley union.
    pub localization_ratio: f64,
}

/// An ensemble of exact quenched solves with the annealed reference.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleResult {
    pub config: EnsembleConfig,
    pub annealed_log_z_capacity: f64,
    pub annealed_log_z_harmonic_sum: f64,
    pub annealed_log_hitting_time: f64,
    pub annealed_localization_ratio: f64,
    pub records: Vec<RealizationRecord>,
    pub solver_failures: usize,
}

impl EnsembleResult {
    pub fn values(&self, functional: TailFunctional) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| match functional {
                TailFunctional::LogZCapacity => r.log_z_capacity,
                TailFunctional::LogHarmonicSum => r.log_z_harmonic_sum,
                TailFunctional::LogHittingTime => r.log_hitting_time,
            })
            .collect()
    }

    pub fn annealed_value(&self, functional: TailFunctional) -> f64 {
        match functional {
            TailFunctional::LogZCapacity => self.annealed_log_z_capacity,
            TailFunctional::LogHarmonicSum => self.annealed_log_z_harmonic_sum,
            TailFunctional::LogHittingTime => self.annealed_log_hitting_time,
        }
    }
}

/// Run the ensemble: build the annealed chain once (transition pair,
/// metastable partition, reference solve), then solve every quenched
/// realisation exactly. Realisations are independent jobs; solver failures
/// are counted and skipped rather than aborting the run.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleResult> {
    let annealed_model = ModelSpec::new(config.n_sites, config.q, config.beta, None)?;
    let (a, b) = micro::transition_fibre_pair(&annealed_model, config.transition)?;
    let annealed_chain = micro::metropolis_kernel(&annealed_model)?;

    // starting-valley union from the annealed partition over all wells
    let anchors = micro::metastable_anchors(&annealed_model)?;
    let wells: Vec<Vec<usize>> = anchors
        .anchors
        .iter()
        .map(|p| micro::fibre(config.n_sites, config.q, p.counts()))
        .collect::<Result<Vec<_>>>()?;
    let partition = potential::metastable_partition(&annealed_chain, &wells)?;
    let (a_anchors, _) = micro::transition_anchor_pair(&annealed_model, config.transition)?;
    let a_well_indices: Vec<usize> = anchors
        .anchors
        .iter()
        .enumerate()
        .filter(|(_, p)| a_anchors.iter().any(|ap| ap == *p))
        .map(|(i, _)| i)
        .collect();
    let in_start_valley: Vec<bool> = partition
        .assignment
        .iter()
        .map(|v| a_well_indices.contains(v))
        .collect();

    let valley_mass = |mu: &[f64]| -> f64 {
        mu.iter()
            .zip(&in_start_valley)
            .filter(|&(_, &inside)| inside)
            .map(|(m, _)| m)
            .sum()
    };

    let ann_sol = potential::equilibrium_potential(&annealed_chain, &a, &b)?;
    let ann_mu = annealed_chain.mu_shifted();
    let annealed_localization_ratio = ann_sol.harmonic_sum / valley_mass(&ann_mu);

    let results: Vec<std::result::Result<RealizationRecord, String>> = (0..config.n_realizations)
        .into_par_iter()
        .map(|r| {
            let run = || -> Result<RealizationRecord> {
                let coupling_seed = config.seed.wrapping_add(1 + r as u64);
                let couplings =
                    disorder::sample_couplings(config.dist, config.n_sites, coupling_seed)?;
                let model =
                    ModelSpec::new(config.n_sites, config.q, config.beta, Some(couplings))?;
                let gap = disorder::xi_event(&model, config.gap_threshold_a, coupling_seed)?;
                let chain = micro::metropolis_kernel(&model)?;
                let sol = potential::equilibrium_potential(&chain, &a, &b)?;
                let mu = chain.mu_shifted();
                Ok(RealizationRecord {
                    index: r,
                    coupling_seed,
                    log_z_capacity: sol.capacity_log(),
                    log_z_harmonic_sum: sol.harmonic_sum_log(),
                    log_hitting_time: sol.hitting_time_log(),
                    gap_event_holds: gap.holds,
                    localization_ratio: sol.harmonic_sum / valley_mass(&mu),
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let mut records = Vec::with_capacity(config.n_realizations);
    let mut solver_failures = 0;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(_) => solver_failures += 1,
        }
    }
    if records.is_empty() {
        return Err(Error::Numeric("every realisation failed to solve".into()));
    }
    Ok(EnsembleResult {
        config: config.clone(),
        annealed_log_z_capacity: ann_sol.capacity_log(),
        annealed_log_z_harmonic_sum: ann_sol.harmonic_sum_log(),
        annealed_log_hitting_time: ann_sol.hitting_time_log(),
        annealed_localization_ratio,
        records,
        solver_failures,
    })
}

/// One row of the empirical-versus-analytic tail comparison.
#[derive(Debug, Clone, Serialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical_two_sided: f64,
    pub bound_legendre_two_sided: f64,
    pub bound_gaussian_two_sided: f64,
    pub binomial_se: f64,
    pub within_bound: bool,
}

/// Empirical tail frequencies of a centred quenched functional against the
/// analytic bounds, plus the annealed moment comparison for the capacity.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub functional: TailFunctional,
    pub n_pairs: usize,
    pub lipschitz: f64,
    pub rows: Vec<TailRow>,
    pub all_within: bool,
    /// `(E[(Z cap)^{+1}]) / annealed` and `(E[(Z cap)^{-1}])^{-1} /
    /// annealed`, as logs; both must sit inside the annealed moment window.
    pub log_moment_ratio_plus: f64,
    pub log_moment_ratio_minus: f64,
    pub moment_window_halfwidth: f64,
    pub moments_within: bool,
    pub solver_failures: usize,
}

/// Compare empirical two-sided tails of the chosen functional with the
/// Chernoff bounds at each grid point. The Lipschitz data is
/// `(n, C) = (N(N-1)/2, factor * beta / N)` with the factor fixed per
/// functional.
pub fn empirical_tail_report(
    ensemble: &EnsembleResult,
    functional: TailFunctional,
    t_grid: &[f64],
    moment_slack: f64,
) -> Result<TailReport> {
    let cfg = &ensemble.config;
    let values = ensemble.values(functional);
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let n_pairs = cfg.n_sites * (cfg.n_sites - 1) / 2;
    let c = functional.lipschitz_factor() * cfg.beta / cfg.n_sites as f64;
    let mut rows = Vec::with_capacity(t_grid.len());
    let mut all_within = true;
    for &t in t_grid {
        let bounds = chernoff_tail_bound(cfg.dist, n_pairs, c, t)?;
        let exceed = values.iter().filter(|&&x| (x - mean).abs() > t).count();
        let empirical = exceed as f64 / m;
        let b2 = bounds.legendre_exact.two_sided();
        let p = b2.min(1.0);
        let se = (p * (1.0 - p) / m).sqrt();
        let within = empirical <= b2 + 3.0 * se;
        all_within &= within;
        rows.push(TailRow {
            t,
            empirical_two_sided: empirical,
            bound_legendre_two_sided: b2,
            bound_gaussian_two_sided: bounds.gaussian_approx.two_sided(),
            binomial_se: se,
            within_bound: within,
        });
    }
    // annealed moment comparison for the capacity functional
    let caps = ensemble.values(TailFunctional::LogZCapacity);
    let ann = ensemble.annealed_log_z_capacity;
    let rel: Vec<f64> = caps.iter().map(|x| x - ann).collect();
    let neg: Vec<f64> = rel.iter().map(|x| -x).collect();
    let log_plus = numeric::log_sum_exp(&rel) - m.ln();
    let log_minus = -(numeric::log_sum_exp(&neg) - m.ln());
    let halfwidth =
        cfg.beta * cfg.beta * cfg.dist.variance() / 4.0 * (1.0 + moment_slack) + moment_slack;
    let moments_within = log_plus.abs() <= halfwidth && log_minus.abs() <= halfwidth;
    Ok(TailReport {
        functional,
        n_pairs,
        lipschitz: c,
        rows,
        all_within,
        log_moment_ratio_plus: log_plus,
        log_moment_ratio_minus: log_minus,
        moment_window_halfwidth: halfwidth,
        moments_within,
        solver_failures: ensemble.solver_failures,
    })
}

/// Fitted sub-Gaussian envelope of centred values: survival frequencies
/// regressed as `ln S(s) = ln c3 - c4 s^2`.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeFit {
    pub c3: f64,
    pub c4: f64,
    pub points_used: usize,
}

pub fn fit_subgaussian_envelope(values: &[f64]) -> Option<EnvelopeFit> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let devs: Vec<f64> = values.iter().map(|v| (v - mean).abs()).collect();
    let max_dev = devs.iter().cloned().fold(0.0, f64::max);
    if max_dev == 0.0 {
        return None;
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 1..=8 {
        let s = max_dev * k as f64 / 10.0;
        let surv = devs.iter().filter(|&&d| d >= s).count() as f64 / m;
        if surv > 0.0 {
            xs.push(s * s);
            ys.push(surv.ln());
        }
    }
    if xs.len() < 3 {
        return None;
    }
    let (intercept, slope) = numeric::linear_fit(&xs, &ys);
    Some(EnvelopeFit {
        c3: intercept.exp(),
        c4: -slope,
        points_used: xs.len(),
    })
}

/// Annealed-versus-quenched comparison of the mean hitting time, the
/// localization of the harmonic sum on the starting valley, and the
/// sub-Gaussian envelope of the log hitting-time ratio.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// Mean over realisations of `ln E[tau] - ln(annealed tau)`.
    pub mean_log_gap: f64,
    pub gap_window: (f64, f64),
    pub gap_within: bool,
    /// Localization ratios on realisations where the uniform-gap event held.
    pub localization_min: f64,
    pub localization_max: f64,
    pub localization_window: (f64, f64),
    pub localization_within: bool,
    pub gap_event_fraction: f64,
    pub envelope: Option<EnvelopeFit>,
    pub envelope_positive_rate: bool,
    pub solver_failures: usize,
}

/// Evaluate the annealed window `[-v beta^2 / 4 - slack, v beta^2 / 2 +
/// slack]` for the mean log hitting-time gap, and the `[1 - delta, 1 +
/// delta]` localization window on gap-event realisations.
pub fn annealed_gap_report(
    ensemble: &EnsembleResult,
    gap_slack: f64,
    localization_delta: f64,
) -> GapReport {
    let cfg = &ensemble.config;
    let v = cfg.dist.variance();
    let beta = cfg.beta;
    let gaps: Vec<f64> = ensemble
        .records
        .iter()
        .map(|r| r.log_hitting_time - ensemble.annealed_log_hitting_time)
        .collect();
    let mean_log_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let gap_window = (-v * beta * beta / 4.0 - gap_slack, v * beta * beta / 2.0 + gap_slack);
    let gap_within = mean_log_gap >= gap_window.0 && mean_log_gap <= gap_window.1;

    let on_event: Vec<f64> = ensemble
        .records
        .iter()
        .filter(|r| r.gap_event_holds)
        .map(|r| r.localization_ratio)
        .collect();
    let gap_event_fraction = on_event.len() as f64 / ensemble.records.len() as f64;
    let (loc_min, loc_max) = on_event.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, &x| {
        (acc.0.min(x), acc.1.max(x))
    });
    let localization_window = (1.0 - localization_delta, 1.0 + localization_delta);
    let localization_within = !on_event.is_empty()
        && loc_min >= localization_window.0
        && loc_max <= localization_window.1;

    let envelope = fit_subgaussian_envelope(&gaps);
    let envelope_positive_rate = envelope.as_ref().map(|e| e.c4 > 0.0).unwrap_or(false);
    GapReport {
        mean_log_gap,
        gap_window,
        gap_within,
        localization_min: loc_min,
        localization_max: loc_max,
        localization_window,
        localization_within,
        gap_event_fraction,
        envelope,
        envelope_positive_rate,
        solver_failures: ensemble.solver_failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetrized_cgf_is_even_and_zero_at_zero() {
        for dist in [
            CouplingDistribution::ScaledBernoulli(0.4),
            CouplingDistribution::ScaledPoisson(0.7),
            CouplingDistribution::Gaussian(0.5),
        ] {
            assert_eq!(symmetrized_cgf(dist, 0.0).unwrap(), 0.0);
            for &l in &[0.2, 0.9, 2.3] {
                let a = symmetrized_cgf(dist, l).unwrap();
                let b = symmetrized_cgf(dist, -l).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetrized_cgf_gaussian_closed_form() {
        let v = 0.37;
        for &l in &[0.1, 0.5, 1.7] {
            let got = symmetrized_cgf(CouplingDistribution::Gaussian(v), l).unwrap();
            assert!((got - v * l * l).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetrized_cgf_bernoulli_against_atom_sum() {
        // the centred scaled Bernoulli(1/2) takes values -1 and +1 with
        // equal mass, so the difference of two copies has atoms
        // {-2, 0, 2} with masses {1/4, 1/2, 1/4}
        let dist = CouplingDistribution::ScaledBernoulli(0.5);
        let lam = 1.0;
        let got = symmetrized_cgf(dist, lam).unwrap();
        let oracle = (0.25 * (-2.0f64 * lam).exp() + 0.5 + 0.25 * (2.0f64 * lam).exp()).ln();
        assert!((got - oracle).abs() < 1e-6, "{got} vs {oracle}");
    }

    #[test]
    fn legendre_closed_forms_and_small_t() {
        // phi1*(0) = 0
        assert_eq!(legendre(CouplingDistribution::Gaussian(1.0), 0.0).unwrap(), 0.0);
        // Gaussian: phi1(l) = v l^2, so phi1*(t) = t^2 / (4 v)
        let v = 0.6;
        for &t in &[0.1, 0.7, 2.0] {
            let got = legendre(CouplingDistribution::Gaussian(v), t).unwrap();
            assert!((got - t * t / (4.0 * v)).abs() < 1e-10, "t = {t}: {got}");
        }
        // small-t law for the scaled Bernoulli(1/2): variance 1
        let dist = CouplingDistribution::ScaledBernoulli(0.5);
        for &t in &[1e-3, 1e-2] {
            let got = legendre(dist, t).unwrap();
            let quad = t * t / 4.0;
            assert!(
                (got / quad - 1.0).abs() < 0.02,
                "t = {t}: {got} vs {quad}"
            );
        }
        // degenerate coupling: unbounded supremum is an error
        assert!(legendre(CouplingDistribution::DeterministicOne, 0.5).is_err());
    }

    #[test]
    fn legendre_transform_is_convex_and_nonnegative() {
        let dist = CouplingDistribution::ScaledPoisson(0.5);
        let grid: Vec<f64> = (0..30).map(|k| k as f64 * 0.05).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| legendre(dist, t).unwrap()).collect();
        assert!(vals.iter().all(|&v| v >= -1e-15));
        for w in vals.windows(3) {
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-8);
        }
    }

    #[test]
    fn chernoff_bound_formula_evaluation() {
        // the Gaussian form at (n, C) = (N(N-1)/2, beta/N), beta = v = 1,
        // approaches 2 exp(-t^2 / (2 beta^2 v)) for large N; at t = 2 that
        // is 2 e^{-2}
        let n_sites = 2000usize;
        let n_pairs = n_sites * (n_sites - 1) / 2;
        let c = 1.0 / n_sites as f64;
        let b = chernoff_tail_bound(CouplingDistribution::Gaussian(1.0), n_pairs, c, 2.0).unwrap();
        let target = 2.0 * (-2.0f64).exp();
        assert!(
            (b.gaussian_approx.two_sided() - target).abs() < 2e-3,
            "{} vs {target}",
            b.gaussian_approx.two_sided()
        );
        // exact formula at the literal (n, C)
        let expect = (-(2.0f64 * 2.0) / (4.0 * c * c * n_pairs as f64)).exp();
        assert_eq!(b.gaussian_approx.bound, expect);
        // vacuous at t = 0
        let b0 = chernoff_tail_bound(CouplingDistribution::Gaussian(1.0), 10, 0.1, 0.0).unwrap();
        assert_eq!(b0.legendre_exact.bound, 1.0);
        assert_eq!(b0.gaussian_approx.bound, 1.0);
    }

    #[test]
    fn bound_is_monotone_and_at_most_one() {
        let dist = CouplingDistribution::ScaledBernoulli(0.5);
        let mut last = f64::INFINITY;
        for k in 0..40 {
            let t = k as f64 * 0.25;
            let b = chernoff_tail_bound(dist, 190, 0.05, t).unwrap();
            assert!(b.legendre_exact.bound <= 1.0 + 1e-15);
            assert!(b.legendre_exact.bound <= last + 1e-15);
            last = b.legendre_exact.bound;
        }
    }

    #[test]
    fn exact_bound_tracks_gaussian_in_the_small_deviation_face() {
        // bounded couplings: the exact bound is at least as strong for
        // small t, and the two agree to a few percent near zero
        let dist = CouplingDistribution::ScaledBernoulli(0.5);
        let n = 190;
        let c = 0.05;
        for k in 1..=10 {
            let t = 0.02 * k as f64;
            let b = chernoff_tail_bound(dist, n, c, t).unwrap();
            assert!(b.legendre_exact.bound <= b.gaussian_approx.bound * (1.0 + 1e-12));
            if k <= 2 {
                assert!(b.legendre_exact.bound >= b.gaussian_approx.bound * 0.9);
            }
        }
        // heavy-tailed side: the ordering flips far out
        let dist = CouplingDistribution::ScaledPoisson(0.5);
        let far = chernoff_tail_bound(dist, 190, 0.05, 40.0).unwrap();
        assert!(far.legendre_exact.bound > far.gaussian_approx.bound);
    }

    #[test]
    fn ensemble_deterministic_one_has_zero_spread() {
        let cfg = EnsembleConfig {
            q: 3,
            n_sites: 6,
            beta: 2.9,
            dist: CouplingDistribution::DeterministicOne,
            n_realizations: 4,
            seed: 7,
            transition: TransitionKind::Metastable,
            gap_threshold_a: 0.5,
        };
        let ens = run_ensemble(&cfg).unwrap();
        assert_eq!(ens.records.len(), 4);
        assert_eq!(ens.solver_failures, 0);
        for r in &ens.records {
            assert!((r.log_z_capacity - ens.annealed_log_z_capacity).abs() < 1e-12);
            assert!((r.log_hitting_time - ens.annealed_log_hitting_time).abs() < 1e-12);
            assert!(r.gap_event_holds);
        }
        let report = empirical_tail_report(
            &ens,
            TailFunctional::LogZCapacity,
            &[0.05, 0.1, 0.2],
            0.15,
        )
        .unwrap();
        for row in &report.rows {
            assert_eq!(row.empirical_two_sided, 0.0);
        }
        // gap report: exactly zero gap
        let gap = annealed_gap_report(&ens, 0.15, 0.05);
        assert_eq!(gap.mean_log_gap, 0.0);
        assert!(gap.gap_within);
    }

    #[test]
    fn ensemble_is_reproducible() {
        let cfg = EnsembleConfig {
            q: 3,
            n_sites: 6,
            beta: 2.9,
            dist: CouplingDistribution::Gaussian(0.04),
            n_realizations: 6,
            seed: 123,
            transition: TransitionKind::Metastable,
            gap_threshold_a: EnsembleConfig::default_gap_threshold(
                CouplingDistribution::Gaussian(0.04),
                3,
            ),
        };
        let e1 = run_ensemble(&cfg).unwrap();
        let e2 = run_ensemble(&cfg).unwrap();
        for (a, b) in e1.records.iter().zip(&e2.records) {
            assert_eq!(a.log_z_capacity, b.log_z_capacity);
            assert_eq!(a.log_hitting_time, b.log_hitting_time);
        }
        // quenched and annealed stay close at small variance
        for r in &e1.records {
            assert!((r.log_z_capacity - e1.annealed_log_z_capacity).abs() < 2.0);
        }
    }

    #[test]
    fn tail_reports_cover_every_functional() {
        let dist = CouplingDistribution::Gaussian(0.04);
        let cfg = EnsembleConfig {
            q: 3,
            n_sites: 6,
            beta: 2.9,
            dist,
            n_realizations: 12,
            seed: 99,
            transition: TransitionKind::Metastable,
            gap_threshold_a: EnsembleConfig::default_gap_threshold(dist, 3),
        };
        let ens = run_ensemble(&cfg).unwrap();
        let grid = [0.05, 0.1, 0.2, 0.4];
        for functional in [
            TailFunctional::LogZCapacity,
            TailFunctional::LogHarmonicSum,
            TailFunctional::LogHittingTime,
        ] {
            let report = empirical_tail_report(&ens, functional, &grid, 0.15).unwrap();
            assert_eq!(report.rows.len(), grid.len());
            assert_eq!(report.n_pairs, 15);
            // the hitting time carries twice the per-coupling width
            let base = cfg.beta / cfg.n_sites as f64;
            let expect = functional.lipschitz_factor() * base;
            assert_eq!(report.lipschitz, expect);
            for row in &report.rows {
                assert!(row.bound_legendre_two_sided > 0.0);
                assert!(row.empirical_two_sided <= 1.0);
            }
        }
    }

    #[test]
    fn envelope_fit_on_gaussian_like_values() {
        // a dense symmetric sample has a positive fitted decay rate
        let values: Vec<f64> = (0..4000)
            .map(|k| {
                let u = (k as f64 + 0.5) / 4000.0;
                // inverse error-function-ish transform via logits, good
                // enough for a monotone symmetric sample
                (u / (1.0 - u)).ln() * 0.3
            })
            .collect();
        let fit = fit_subgaussian_envelope(&values).unwrap();
        assert!(fit.c4 > 0.0);
        assert!(fit.c3 > 0.0);
    }
}
