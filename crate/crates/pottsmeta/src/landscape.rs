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

//! The limiting free energy of the mean-field q-colour model on the
//! probability simplex,
//!
//! ```text
//!   F(x) = -||x||^2 / 2 + (1/beta) * sum_i x_i ln x_i,
//! ```
//!
//! its critical points, the four critical temperatures and the regime
//! classification with communication heights between wells.
//!
//! Every critical point of `F` has coordinates taking at most two distinct
//! values, so the whole critical structure is indexed by how many
//! coordinates carry the larger value: one (`Coloured` minima and their
//! `UniformGate` saddles) or two (`PairGate` saddles). Each family reduces
//! to a scalar equation solved by bracketing and bisection.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric;
use crate::simplex::SimplexPoint;

/// Residual tolerance for scalar root finding.
const ROOT_TOL: f64 = 1e-12;
/// Absolute tolerance for critical temperatures.
const BETA_TOL: f64 = 1e-10;
/// Gradient-norm requirement on returned critical points.
const GRAD_TOL: f64 = 1e-9;
/// Eigenvalues below this magnitude count as degenerate.
const EIG_TOL: f64 = 1e-8;

/// The limiting free energy; boundary terms `x ln x` extend by 0.
pub fn free_energy(x: &SimplexPoint, beta: f64, q: usize) -> Result<f64> {
    if x.q() != q {
        return Err(Error::Argument(format!(
            "point has {} colours, expected {q}",
            x.q()
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain("beta must be positive".into()));
    }
    // summing in sorted coordinate order makes the value exactly invariant
    // under colour permutations
    let mut coords = x.coords().to_vec();
    coords.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sq = 0.0;
    let mut ent = 0.0;
    for &c in &coords {
        sq += c * c;
        if c > 0.0 {
            ent += c * c.ln();
        }
    }
    Ok(-0.5 * sq + ent / beta)
}

/// Euclidean gradient of `F` projected onto the tangent space of the
/// simplex (components summing to zero). Boundary points are refused: the
/// entropy gradient diverges there and the critical-point analysis is an
/// interior affair.
pub fn simplex_gradient(x: &SimplexPoint, beta: f64) -> Result<Vec<f64>> {
    if !x.is_interior() {
        return Err(Error::Domain(
            "gradient undefined on the simplex boundary".into(),
        ));
    }
    let q = x.q();
    let g: Vec<f64> = x
        .coords()
        .iter()
        .map(|&c| -c + (c.ln() + 1.0) / beta)
        .collect();
    let mean = g.iter().sum::<f64>() / q as f64;
    Ok(g.into_iter().map(|gi| gi - mean).collect())
}

/// Eigenvalues of the Hessian of `F` restricted to the tangent space,
/// ascending. The ambient Hessian is diagonal with entries
/// `-1 + 1/(beta x_i)`; it is compressed with an orthonormal basis of the
/// zero-sum hyperplane.
pub fn tangent_hessian_eigenvalues(x: &SimplexPoint, beta: f64) -> Result<Vec<f64>> {
    if !x.is_interior() {
        return Err(Error::Domain(
            "Hessian undefined on the simplex boundary".into(),
        ));
    }
    let q = x.q();
    let d: Vec<f64> = x.coords().iter().map(|&c| -1.0 + 1.0 / (beta * c)).collect();
    // orthonormal basis v_k of {v : sum v = 0}
    let mut basis = Vec::with_capacity(q - 1);
    for k in 0..q - 1 {
        let mut v = vec![0.0; q];
        for item in v.iter_mut().take(k + 1) {
            *item = 1.0;
        }
        v[k + 1] = -((k + 1) as f64);
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    let m = q - 1;
    let mut ht = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut s = 0.0;
            for k in 0..q {
                s += basis[i][k] * d[k] * basis[j][k];
            }
            ht[i * m + j] = s;
        }
    }
    Ok(numeric::symmetric_eigenvalues(&ht, m))
}

/// Classification of a critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    LocalMin,
    GlobalMin,
    SaddleIndex1,
    LocalMax,
    Degenerate,
}

/// Which symmetric family a critical point belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    /// The barycentre (1/q, ..., 1/q).
    Uniform,
    /// Minimum with colour `i` dominant.
    Coloured(usize),
    /// Saddle on the axis between the barycentre and colour `i`.
    UniformGate(usize),
    /// Saddle with colours `j` and `k` jointly dominant.
    PairGate(usize, usize),
}

/// A located critical point of the free energy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: SimplexPoint,
    pub value: f64,
    pub kind: CriticalKind,
    pub label: PointLabel,
}

/// Point with `count` coordinates at the larger of two values, parametrised
/// by the gap `u`: large = (1 + (q-count) u)/q, small = (1 - count u)/q.
fn two_value_point(q: usize, count: usize, u: f64, raised: &[usize]) -> Result<SimplexPoint> {
    let large = (1.0 + (q - count) as f64 * u) / q as f64;
    let small = (1.0 - count as f64 * u) / q as f64;
    let mut coords = vec![small; q];
    for &r in raised {
        coords[r] = large;
    }
    SimplexPoint::new(coords)
}

/// Residual of the two-value criticality equation for the family with
/// `count` raised coordinates: `ln(1 + (q-count)u) - ln(1 - count u) - beta u`.
fn family_residual(q: usize, count: usize, u: f64, beta: f64) -> f64 {
    (1.0 + (q - count) as f64 * u).ln() - (1.0 - count as f64 * u).ln() - beta * u
}

/// All roots `u > 0` of the two-value equation, ascending, each refined by
/// bisection to residual below `ROOT_TOL`.
fn family_roots(q: usize, count: usize, beta: f64) -> Vec<f64> {
    let hi = 1.0 / count as f64 - 1e-12;
    let grid = 20_000;
    let mut roots = Vec::new();
    let mut prev_u = hi * 1e-9;
    let mut prev_f = family_residual(q, count, prev_u, beta);
    for k in 1..=grid {
        let u = hi * k as f64 / grid as f64;
        let f = family_residual(q, count, u, beta);
        if prev_f == 0.0 {
            roots.push(prev_u);
        } else if prev_f * f < 0.0 {
            if let Ok(r) = numeric::bisect(|s| family_residual(q, count, s, beta), prev_u, u, 1e-16)
            {
                roots.push(r);
            }
        }
        prev_u = u;
        prev_f = f;
    }
    roots.retain(|&r| family_residual(q, count, r, beta).abs() <= ROOT_TOL);
    roots
}

/// All solutions `s` in `[0, 1)` of the one-raised-coordinate criticality
/// equation `ln(1 + (q-1)s) - ln(1-s) = beta s`, ascending; `s = 0` is
/// always included.
pub fn mean_field_solutions(beta: f64, q: usize) -> Result<Vec<f64>> {
    if !(beta > 0.0) {
        return Err(Error::Domain("beta must be positive".into()));
    }
    if q < 2 {
        return Err(Error::Argument("need q >= 2".into()));
    }
    let mut out = vec![0.0];
    out.extend(family_roots(q, 1, beta));
    Ok(out)
}

fn classify_by_inertia(eigs: &[f64]) -> CriticalKind {
    let scale = eigs.iter().fold(0.0f64, |a, &e| a.max(e.abs())).max(1.0);
    if eigs.iter().any(|&e| e.abs() <= EIG_TOL * scale) {
        return CriticalKind::Degenerate;
    }
    let neg = eigs.iter().filter(|&&e| e < 0.0).count();
    if neg == 0 {
        CriticalKind::LocalMin
    } else if neg == 1 {
        CriticalKind::SaddleIndex1
    } else if neg == eigs.len() {
        CriticalKind::LocalMax
    } else {
        CriticalKind::Degenerate
    }
}

fn checked_critical_point(
    q: usize,
    beta: f64,
    location: SimplexPoint,
    label: PointLabel,
) -> Result<CriticalPoint> {
    let grad = simplex_gradient(&location, beta)?;
    let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if gn > GRAD_TOL {
        return Err(Error::Numeric(format!(
            "critical point residual too large: |grad| = {gn:.3e} at {:?}",
            location.coords()
        )));
    }
    let eigs = tangent_hessian_eigenvalues(&location, beta)?;
    let kind = classify_by_inertia(&eigs);
    let value = free_energy(&location, beta, q)?;
    Ok(CriticalPoint {
        location,
        value,
        kind,
        label,
    })
}

/// Local and global minima of the free energy at `(beta, q)`.
///
/// The barycentre is included while it is a minimum (`beta < q`); the `q`
/// coloured minima appear once the one-raised-coordinate equation has a
/// positive solution whose Hessian is positive definite. Kinds carry the
/// local/global distinction by direct value comparison.
pub fn minima(beta: f64, q: usize) -> Result<Vec<CriticalPoint>> {
    if !(beta > 0.0) {
        return Err(Error::Domain("beta must be positive".into()));
    }
    if q < 2 {
        return Err(Error::Argument("need q >= 2".into()));
    }
    let mut points = Vec::new();
    let uniform = SimplexPoint::uniform(q);
    let eig_m0 = tangent_hessian_eigenvalues(&uniform, beta)?;
    if classify_by_inertia(&eig_m0) == CriticalKind::LocalMin {
        points.push(checked_critical_point(q, beta, uniform, PointLabel::Uniform)?);
    }
    let roots = family_roots(q, 1, beta);
    if let Some(&s) = roots.last() {
        let probe = two_value_point(q, 1, s, &[0])?;
        let eigs = tangent_hessian_eigenvalues(&probe, beta)?;
        if classify_by_inertia(&eigs) == CriticalKind::LocalMin {
            for i in 0..q {
                let loc = two_value_point(q, 1, s, &[i])?;
                points.push(checked_critical_point(q, beta, loc, PointLabel::Coloured(i))?);
            }
        }
    }
    // resolve local vs global by value
    let min_value = points
        .iter()
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);
    for p in points.iter_mut() {
        if p.kind == CriticalKind::LocalMin && p.value <= min_value + 1e-12 {
            p.kind = CriticalKind::GlobalMin;
        }
    }
    Ok(points)
}

/// Index-1 saddle points of the free energy at `(beta, q)`.
///
/// `UniformGate(i)` sits on the symmetry axis through the barycentre and the
/// coloured minimum `i` (smaller positive root of the one-raised equation);
/// `PairGate(j, k)` has two raised coordinates (largest root of the
/// two-raised equation). Only points passing the index-1 Hessian check are
/// returned. For `q = 2` the barycentre itself is the gate once the two
/// coloured minima exist; it is reported under `PairGate(0, 1)`.
pub fn saddle_points(beta: f64, q: usize) -> Result<Vec<CriticalPoint>> {
    if q < 2 {
        return Err(Error::Argument("need q >= 2".into()));
    }
    let temps = critical_temperatures(q)?;
    if beta <= temps.beta1 {
        return Err(Error::Domain(format!(
            "no saddles below beta1 = {}",
            temps.beta1
        )));
    }
    let mut out = Vec::new();
    if q == 2 {
        if beta > 2.0 {
            let mid = SimplexPoint::uniform(2);
            let value = free_energy(&mid, beta, 2)?;
            let eigs = tangent_hessian_eigenvalues(&mid, beta)?;
            out.push(CriticalPoint {
                location: mid,
                value,
                kind: classify_by_inertia(&eigs),
                label: PointLabel::PairGate(0, 1),
            });
        }
        return Ok(out);
    }
    let one_raised = family_roots(q, 1, beta);
    if one_raised.len() >= 2 {
        let s_small = one_raised[0];
        let probe = two_value_point(q, 1, s_small, &[0])?;
        let eigs = tangent_hessian_eigenvalues(&probe, beta)?;
        if classify_by_inertia(&eigs) == CriticalKind::SaddleIndex1 {
            for i in 0..q {
                let loc = two_value_point(q, 1, s_small, &[i])?;
                let p = checked_critical_point(q, beta, loc, PointLabel::UniformGate(i))?;
                out.push(p);
            }
        }
    }
    let two_raised = family_roots(q, 2, beta);
    if let Some(&u) = two_raised.last() {
        let probe = two_value_point(q, 2, u, &[0, 1])?;
        let eigs = tangent_hessian_eigenvalues(&probe, beta)?;
        if classify_by_inertia(&eigs) == CriticalKind::SaddleIndex1 {
            for j in 0..q {
                for k in (j + 1)..q {
                    let loc = two_value_point(q, 2, u, &[j, k])?;
                    let p = checked_critical_point(q, beta, loc, PointLabel::PairGate(j, k))?;
                    if p.kind != CriticalKind::SaddleIndex1 {
                        return Err(Error::Numeric(format!(
                            "pair saddle candidate has kind {:?}, expected index 1",
                            p.kind
                        )));
                    }
                    out.push(p);
                }
            }
        }
    }
    Ok(out)
}

/// The four critical temperatures of the landscape for `q >= 3`:
/// `beta1` where coloured solutions appear, `beta2` where coloured and
/// uniform minima have equal depth, `beta3` where the pair gates drop below
/// the two-step uniform gates, and `beta4 = q` where the barycentre loses
/// stability. For `q = 2` all four collapse to the single critical value 2
/// and `degenerate` is set.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalTemperatures {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub beta4: f64,
    pub degenerate: bool,
}

impl CriticalTemperatures {
    pub fn as_tuple(&self) -> (f64, f64, f64, f64) {
        (self.beta1, self.beta2, self.beta3, self.beta4)
    }
}

/// Smallest beta at which the one-raised equation has a nonzero solution:
/// the minimum over `s` of `[ln(1+(q-1)s) - ln(1-s)] / s`.
fn beta1(q: usize) -> f64 {
    let g = |s: f64| ((1.0 + (q as f64 - 1.0) * s).ln() - (1.0 - s).ln()) / s;
    let (_, b1) = numeric::golden_min(g, 1e-9, 1.0 - 1e-9, 1e-13);
    b1
}

fn coloured_depth_gap(beta: f64, q: usize) -> f64 {
    // F(coloured) - F(uniform); negative once the coloured wells are deeper
    let roots = family_roots(q, 1, beta);
    let s = *roots.last().expect("no coloured solution in beta2 bracket");
    let m1 = two_value_point(q, 1, s, &[0]).unwrap();
    let f1 = free_energy(&m1, beta, q).unwrap();
    let f0 = free_energy(&SimplexPoint::uniform(q), beta, q).unwrap();
    f1 - f0
}

pub fn critical_temperatures(q: usize) -> Result<CriticalTemperatures> {
    if q < 2 {
        return Err(Error::Argument("need q >= 2".into()));
    }
    if q == 2 {
        return Ok(CriticalTemperatures {
            beta1: 2.0,
            beta2: 2.0,
            beta3: 2.0,
            beta4: 2.0,
            degenerate: true,
        });
    }
    let b4 = q as f64;
    let b1 = beta1(q);
    let b2 = numeric::bisect(|b| coloured_depth_gap(b, q), b1 + 1e-7, b4, BETA_TOL)?;
    // beta3: first beta at which an index-1 pair gate exists at or below the
    // level of the uniform gates; if that never happens before beta4 the two
    // temperatures coincide. In the sliver below beta4 the uniform gate
    // merges into the barycentre and its root becomes numerically
    // unresolvable, so the barycentre level stands in for it there.
    let pair_below = |beta: f64| -> bool {
        let one = family_roots(q, 1, beta);
        if one.is_empty() {
            return false;
        }
        let level = if one.len() >= 2 {
            let z0 = two_value_point(q, 1, one[0], &[0]).unwrap();
            free_energy(&z0, beta, q).unwrap()
        } else {
            free_energy(&SimplexPoint::uniform(q), beta, q).unwrap()
        };
        let two = family_roots(q, 2, beta);
        match two.last() {
            None => false,
            Some(&u) => {
                let z = two_value_point(q, 2, u, &[0, 1]).unwrap();
                let eigs = tangent_hessian_eigenvalues(&z, beta).unwrap();
                let neg = eigs.iter().filter(|&&e| e < 0.0).count();
                neg == 1 && free_energy(&z, beta, q).unwrap() <= level
            }
        }
    };
    let b3 = numeric::bisect_predicate(pair_below, b2 + 1e-9, b4, BETA_TOL);
    Ok(CriticalTemperatures {
        beta1: b1,
        beta2: b2,
        beta3: b3,
        beta4: b4,
        degenerate: false,
    })
}

/// The eight beta intervals of the critical-point table, named by what the
/// landscape looks like there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `(0, beta1]`: the barycentre is the unique minimum.
    SingleWell,
    /// `(beta1, beta2)`: coloured minima exist but are shallower.
    ColouredLocal,
    /// `{beta2}`: coloured and uniform minima at equal depth.
    EqualDepth,
    /// `(beta2, beta3)`: the barycentre is a local minimum, coloured global.
    UniformLocal,
    /// `{beta3}`: pair gates reach the level of the two-step uniform gates.
    GateCrossing,
    /// `(beta3, beta4)`: coloured wells communicate through direct pair gates.
    DirectGates,
    /// `{beta4}`: the barycentre is degenerate.
    UniformDegenerate,
    /// `(beta4, inf)`: the barycentre is a local maximum.
    UniformUnstable,
}

/// Full landscape description at one `(beta, q)`: temperatures, regime,
/// minima, saddles, gate sets between pairs of wells and their
/// communication heights. Gate keys are `"i-j"` with well `0` the
/// barycentre and wells `1..=q` the coloured minima (colour index + 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegimeReport {
    pub beta: f64,
    pub q: usize,
    pub betas: (f64, f64, f64, f64),
    pub regime: Regime,
    pub minima: Vec<CriticalPoint>,
    pub saddles: Vec<CriticalPoint>,
    pub gates: BTreeMap<String, Vec<CriticalPoint>>,
    pub comm_heights: BTreeMap<String, f64>,
    /// Set when beta sits within 1e-9 of a critical temperature.
    pub degenerate_warning: Option<String>,
}

fn well_key(i: usize, j: usize) -> String {
    format!("{}-{}", i.min(j), i.max(j))
}

/// Classify `(beta, q)` into its regime and assemble the gate table.
pub fn classify_regime(beta: f64, q: usize) -> Result<RegimeReport> {
    if !(beta > 0.0) {
        return Err(Error::Domain("beta must be positive".into()));
    }
    let temps = critical_temperatures(q)?;
    let (b1, b2, b3, b4) = temps.as_tuple();
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let degenerate_warning = [(b1, "beta1"), (b2, "beta2"), (b3, "beta3"), (b4, "beta4")]
        .iter()
        .find(|(b, _)| close(beta, *b))
        .map(|(b, name)| format!("beta within 1e-9 of {name} = {b}"));

    let regime = if q == 2 {
        if beta <= 2.0 {
            Regime::SingleWell
        } else {
            Regime::UniformUnstable
        }
    } else if beta <= b1 {
        Regime::SingleWell
    } else if close(beta, b2) {
        Regime::EqualDepth
    } else if beta < b2 {
        Regime::ColouredLocal
    } else if close(beta, b3) && close(b3, b4) {
        // for q = 3, 4 the crossing coincides with the stability edge
        Regime::UniformDegenerate
    } else if close(beta, b3) {
        Regime::GateCrossing
    } else if beta < b3 {
        Regime::UniformLocal
    } else if close(beta, b4) {
        Regime::UniformDegenerate
    } else if beta < b4 {
        Regime::DirectGates
    } else {
        Regime::UniformUnstable
    };

    let minima = minima(beta, q)?;
    let saddles = if regime == Regime::SingleWell {
        Vec::new()
    } else {
        saddle_points(beta, q)?
    };

    let mut gates: BTreeMap<String, Vec<CriticalPoint>> = BTreeMap::new();
    let mut comm_heights = BTreeMap::new();
    let uniform_gate = |i: usize| -> Option<CriticalPoint> {
        saddles
            .iter()
            .find(|p| p.label == PointLabel::UniformGate(i))
            .cloned()
    };
    let pair_gate = |j: usize, k: usize| -> Option<CriticalPoint> {
        saddles
            .iter()
            .find(|p| p.label == PointLabel::PairGate(j.min(k), j.max(k)))
            .cloned()
    };

    if q == 2 {
        if beta > 2.0 {
            if let Some(g) = pair_gate(0, 1) {
                gates.insert(well_key(1, 2), vec![g]);
            }
        }
    } else if regime != Regime::SingleWell {
        // wells 1..=q are the coloured minima (colour index + 1)
        let have_uniform_gates = beta < b4 && !close(beta, b4);
        if have_uniform_gates {
            for i in 0..q {
                if let Some(g) = uniform_gate(i) {
                    gates.insert(well_key(0, i + 1), vec![g]);
                }
            }
        }
        for j in 0..q {
            for k in (j + 1)..q {
                let mut set = Vec::new();
                match regime {
                    Regime::ColouredLocal | Regime::EqualDepth | Regime::UniformLocal => {
                        if let Some(g) = uniform_gate(j) {
                            set.push(g);
                        }
                        if let Some(g) = uniform_gate(k) {
                            set.push(g);
                        }
                    }
                    Regime::GateCrossing => {
                        if let Some(g) = uniform_gate(j) {
                            set.push(g);
                        }
                        if let Some(g) = uniform_gate(k) {
                            set.push(g);
                        }
                        if let Some(g) = pair_gate(j, k) {
                            set.push(g);
                        }
                    }
                    Regime::DirectGates
                    | Regime::UniformDegenerate
                    | Regime::UniformUnstable => {
                        if let Some(g) = pair_gate(j, k) {
                            set.push(g);
                        }
                    }
                    Regime::SingleWell => {}
                }
                if !set.is_empty() {
                    gates.insert(well_key(j + 1, k + 1), set);
                }
            }
        }
    }
    for (key, set) in &gates {
        let h = set.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
        comm_heights.insert(key.clone(), h);
    }

    Ok(RegimeReport {
        beta,
        q,
        betas: temps.as_tuple(),
        regime,
        minima,
        saddles,
        gates,
        comm_heights,
        degenerate_warning,
    })
}

/// Aligned text rendering of a regime report for terminal output.
pub fn render_report_table(report: &RegimeReport) -> String {
    let mut out = String::new();
    let (b1, b2, b3, b4) = report.betas;
    out.push_str(&format!(
        "q = {}  beta = {:.12}  regime = {:?}\n",
        report.q, report.beta, report.regime
    ));
    out.push_str(&format!(
        "beta1 = {b1:.12}  beta2 = {b2:.12}  beta3 = {b3:.12}  beta4 = {b4:.12}\n"
    ));
    out.push_str(&format!(
        "{:<18} {:<14} {:<22} coordinates\n",
        "point", "kind", "free energy"
    ));
    for p in report.minima.iter().chain(report.saddles.iter()) {
        let coords: Vec<String> = p
            .location
            .coords()
            .iter()
            .map(|c| format!("{c:.10}"))
            .collect();
        out.push_str(&format!(
            "{:<18} {:<14} {:<22.15} ({})\n",
            format!("{:?}", p.label),
            format!("{:?}", p.kind),
            p.value,
            coords.join(", ")
        ));
    }
    for (key, h) in &report.comm_heights {
        let names: Vec<String> = report.gates[key]
            .iter()
            .map(|p| format!("{:?}", p.label))
            .collect();
        out.push_str(&format!(
            "gate {key}: height {h:.15} via {{{}}}\n",
            names.join(", ")
        ));
    }
    out
}
