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

//! Cross-module consistency checks: identities connecting the spin chain,
//! the order-parameter chain and the landscape, plus partition-weight
//! scaling over a size grid.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pottsmeta::chain::random_reversible_chain;
use pottsmeta::micro::{self, ModelSpec};
use pottsmeta::potential;
use pottsmeta::{lumped, numeric};

#[test]
fn micro_and_lumped_capacities_agree_up_to_n7() {
    // fibre capacities on the full spin chain match the order-parameter
    // chain once both stationary measures are normalised
    for n in [5usize, 6, 7] {
        let beta = 2.9;
        let model = ModelSpec::new(n, 3, beta, None).unwrap();
        let chain = micro::metropolis_kernel(&model).unwrap();
        let lc = lumped::build_chain(n as u64, 3, beta).unwrap();
        let (af, bf) = micro::transition_fibre_pair(&model, micro::TransitionKind::Tunnelling)
            .unwrap();
        let sol = potential::equilibrium_potential(&chain, &af, &bf).unwrap();
        let micro_log = sol.capacity_log() - chain.log_total_mass();
        let (aa, ba) = micro::transition_anchor_pair(&model, micro::TransitionKind::Tunnelling)
            .unwrap();
        let a: Vec<usize> = aa.iter().map(|p| lc.state(p.counts()).unwrap()).collect();
        let b: Vec<usize> = ba.iter().map(|p| lc.state(p.counts()).unwrap()).collect();
        let lsol = potential::equilibrium_potential(&lc.chain, &a, &b).unwrap();
        let lumped_log = lsol.capacity_log() - lc.chain.log_total_mass();
        assert!(
            (micro_log - lumped_log).abs() < 1e-9,
            "N = {n}: {micro_log} vs {lumped_log}"
        );
    }
}

#[test]
fn flux_and_energy_capacity_routes_agree() {
    // the escape-probability route sum_A mu (1 - h) p and the quadratic
    // form route must coincide
    let mut rng = ChaCha8Rng::seed_from_u64(2_718);
    for _ in 0..20 {
        let chain = random_reversible_chain(25, 30, &mut rng);
        let a = vec![0, 1, 2];
        let b = vec![22, 23, 24];
        let sol = potential::equilibrium_potential(&chain, &a, &b).unwrap();
        let mu = chain.mu_shifted();
        let mut flux = 0.0;
        for &x in &a {
            for &(y, p) in chain.row(x) {
                if !a.contains(&y) {
                    flux += mu[x] * p * (1.0 - sol.h[y]);
                }
            }
        }
        let rel = (flux - sol.capacity).abs() / sol.capacity;
        assert!(rel < 1e-9, "flux {flux} vs energy {}", sol.capacity);
    }
}

#[test]
fn complementarity_on_the_lumped_chain() {
    let lc = lumped::build_chain(15, 3, 2.9).unwrap();
    let a = vec![lc.state(&[5, 5, 5]).unwrap()];
    let b = vec![lc.state(&[11, 2, 2]).unwrap(), lc.state(&[2, 11, 2]).unwrap()];
    let ab = potential::equilibrium_potential(&lc.chain, &a, &b).unwrap();
    let ba = potential::equilibrium_potential(&lc.chain, &b, &a).unwrap();
    for x in 0..lc.chain.n() {
        if a.contains(&x) || b.contains(&x) {
            continue;
        }
        assert!((ab.h[x] + ba.h[x] - 1.0).abs() < 1e-12);
    }
    let scale = ab.capacity.max(ba.capacity);
    assert!((ab.capacity - ba.capacity).abs() <= 1e-12 * scale);
}

#[test]
fn symmetric_valleys_have_equal_masses() {
    // N = 15 keeps every anchor a permutation image of the others: the
    // barycentre rounds to (5,5,5) and the coloured minima to the
    // (11,2,2) family (at sizes where the two small frequencies round
    // with a tie toward one colour, e.g. N = 12, the anchors themselves
    // break the symmetry)
    let n = 15u64;
    let beta = 2.9;
    let lc = lumped::build_chain(n, 3, beta).unwrap();
    let model = ModelSpec::new(n as usize, 3, beta, None).unwrap();
    let anchors = micro::metastable_anchors(&model).unwrap();
    assert!(anchors.includes_uniform);
    let wells: Vec<Vec<usize>> = anchors
        .anchors
        .iter()
        .map(|p| vec![lc.state(p.counts()).unwrap()])
        .collect();
    let part = potential::metastable_partition(&lc.chain, &wells).unwrap();
    let coloured = &part.valley_log_masses[1..];
    for pair in coloured.windows(2) {
        assert!(
            (pair[0] - pair[1]).abs() < 1e-9,
            "coloured valley masses differ: {coloured:?}"
        );
    }
}

#[test]
fn sublevel_indicator_is_an_admissible_upper_bound() {
    // the indicator of the sub-level component around the starting well is
    // a valid test function, so its energy dominates the capacity; the gap
    // reflects the barrier crossing being forced through the level set
    let n = 30u64;
    let beta = 2.9;
    let lc = lumped::build_chain(n, 3, beta).unwrap();
    let model = ModelSpec::new(n as usize, 3, beta, None).unwrap();
    let (aa, ba) = micro::transition_anchor_pair(&model, micro::TransitionKind::Tunnelling)
        .unwrap();
    let a = vec![lc.state(aa[0].counts()).unwrap()];
    let b: Vec<usize> = ba.iter().map(|p| lc.state(p.counts()).unwrap()).collect();
    // sub-level set just below the gate height, restricted to the
    // connected component containing A
    let report = pottsmeta::landscape::classify_regime(beta, 3).unwrap();
    let gate = report.comm_heights["1-2"];
    let f_start = report
        .minima
        .iter()
        .find(|p| p.label == pottsmeta::landscape::PointLabel::Coloured(0))
        .unwrap()
        .value;
    let level = f_start + 0.9 * (gate - f_start);
    let in_level: Vec<bool> = lc
        .lattice
        .points()
        .iter()
        .map(|p| {
            pottsmeta::landscape::free_energy(&p.to_simplex(), beta, 3).unwrap() < level
        })
        .collect();
    // flood fill from A within the sub-level set
    let mut test = vec![0.0; lc.chain.n()];
    let mut stack = vec![a[0]];
    let mut seen = vec![false; lc.chain.n()];
    seen[a[0]] = true;
    while let Some(x) = stack.pop() {
        test[x] = 1.0;
        for &(y, _) in lc.chain.row(x) {
            if !seen[y] && in_level[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    for &x in &b {
        assert_eq!(test[x], 0.0, "target inside the sub-level component");
    }
    let sol = potential::equilibrium_potential(&lc.chain, &a, &b).unwrap();
    let upper = potential::dirichlet_bound(&lc.chain, &a, &b, &test).unwrap();
    assert!(upper >= sol.capacity * (1.0 - 1e-12));
}

#[test]
fn partition_weight_stays_polynomial_in_n() {
    // the valley-to-anchor mass ratio grows at most polynomially: the
    // log-ratio divided by log N stays bounded over the size grid
    let beta = 2.9;
    let mut worst: f64 = 0.0;
    for n in [20u64, 60, 110, 160, 200] {
        let lc = lumped::build_chain(n, 3, beta).unwrap();
        let model = ModelSpec::new(n as usize, 3, beta, None).unwrap();
        let anchors = micro::metastable_anchors(&model).unwrap();
        let wells: Vec<Vec<usize>> = anchors
            .anchors
            .iter()
            .map(|p| vec![lc.state(p.counts()).unwrap()])
            .collect();
        let part = potential::metastable_partition(&lc.chain, &wells).unwrap();
        for (i, well) in wells.iter().enumerate() {
            let anchor_log_mass = numeric::log_sum_exp(
                &well
                    .iter()
                    .map(|&x| lc.chain.log_weights()[x])
                    .collect::<Vec<_>>(),
            );
            let ratio = (part.valley_log_masses[i] - anchor_log_mass) / (n as f64).ln();
            worst = worst.max(ratio);
            assert!(
                ratio <= 4.0,
                "N = {n}, well {i}: log mass ratio / log N = {ratio}"
            );
        }
    }
    println!("worst log(valley mass / anchor mass) / log N = {worst:.3}");
}
