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

//! The order parameter lives on the probability simplex: colour frequencies
//! either as reals ([`SimplexPoint`]) or as integer counts over `N`
//! ([`LatticePoint`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sum-to-one constraint.
pub const SIMPLEX_SUM_TOL: f64 = 1e-12;

/// A probability vector over `q` colours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Argument("need at least two colours".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        if coords.iter().any(|&c| c < 0.0) {
            return Err(Error::Domain("negative coordinate".into()));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_SUM_TOL {
            return Err(Error::Domain(format!(
                "coordinates sum to {sum}, expected 1 within {SIMPLEX_SUM_TOL}"
            )));
        }
        Ok(Self { coords })
    }

    /// The barycentre (1/q, ..., 1/q).
    pub fn uniform(q: usize) -> Self {
        Self {
            coords: vec![1.0 / q as f64; q],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn q(&self) -> usize {
        self.coords.len()
    }

    /// True if every coordinate is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|&c| c > 0.0)
    }

    /// Apply a colour permutation: `result[perm[k]] = self[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = vec![0.0; self.coords.len()];
        for (k, &p) in perm.iter().enumerate() {
            coords[p] = self.coords[k];
        }
        Self { coords }
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// An integer colour-count vector summing to `N`, i.e. a point of the
/// discrete simplex with mesh `1/N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePoint {
    counts: Vec<u64>,
    n: u64,
}

impl LatticePoint {
    pub fn new(counts: Vec<u64>, n: u64) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::Argument("need at least two colours".into()));
        }
        let sum: u64 = counts.iter().sum();
        if sum != n {
            return Err(Error::Argument(format!("counts sum to {sum}, expected {n}")));
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn q(&self) -> usize {
        self.counts.len()
    }

    /// Frequencies `counts / N` as a simplex point.
    pub fn to_simplex(&self) -> SimplexPoint {
        SimplexPoint {
            coords: self.counts.iter().map(|&c| c as f64 / self.n as f64).collect(),
        }
    }

    /// True when `other = self + e_i - e_j` for some `i != j`.
    pub fn is_adjacent(&self, other: &Self) -> bool {
        if self.n != other.n || self.counts.len() != other.counts.len() {
            return false;
        }
        let mut plus = 0;
        let mut minus = 0;
        for (&a, &b) in self.counts.iter().zip(&other.counts) {
            match b as i64 - a as i64 {
                0 => {}
                1 => plus += 1,
                -1 => minus += 1,
                _ => return false,
            }
        }
        plus == 1 && minus == 1
    }
}

/// Nearest point of the discrete simplex to `x`, in Euclidean distance.
///
/// Counts start from the floor of `N x_i` and the remaining mass goes to the
/// coordinates with the largest fractional parts. Ties on the fractional
/// part are broken toward smaller colour indices, which makes the result the
/// lexicographically largest count vector among equidistant optima.
pub fn closest_lattice_point(x: &SimplexPoint, n: u64) -> Result<LatticePoint> {
    if n < 2 {
        return Err(Error::Argument("need N >= 2".into()));
    }
    let q = x.q();
    let scaled: Vec<f64> = x.coords().iter().map(|&c| c * n as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|&s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let deficit = (n - assigned) as usize;
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - counts[a] as f64;
        let fb = scaled[b] - counts[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &k in order.iter().take(deficit) {
        counts[k] += 1;
    }
    LatticePoint::new(counts, n)
}
