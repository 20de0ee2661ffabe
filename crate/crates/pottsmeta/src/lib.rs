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

//! Metastability toolkit for the mean-field q-colour Potts model and its
//! randomly weighted variant.
//!
//! The crate is organised around four layers:
//!
//! * [`landscape`] — the limiting free energy on the probability simplex:
//!   critical points, critical temperatures, regime classification and
//!   communication heights.
//! * [`lumped`] — the colour-frequency (order-parameter) Markov chain on the
//!   discrete simplex, with its discrete free energy and nearest-neighbour
//!   kernel.
//! * [`potential`] — a potential-theory engine for arbitrary reversible
//!   chains: equilibrium potentials, capacities, variational bounds, hitting
//!   times, metastable partitions.
//! * [`micro`] / [`disorder`] / [`concentration`] — the full spin model,
//!   random interaction arrays, and the Chernoff-type concentration harness
//!   comparing quenched and annealed quantities.
//!
//! Everything is deterministic given explicit seeds; stationary weights are
//! carried in log-space throughout.

pub mod chain;
pub mod cli;
pub mod concentration;
pub mod disorder;
pub mod error;
pub mod landscape;
pub mod lumped;
pub mod micro;
pub mod numeric;
pub mod potential;
pub mod simplex;

pub use chain::ChainSpec;
pub use error::{Error, Result};
pub use simplex::{LatticePoint, SimplexPoint};
