//! Consensus decomposition of the AC/DC OPF.
//!
//! The hybrid problem splits along the converter tie lines into one
//! subproblem per AC region plus one for the whole MTDC system (stations,
//! DC grid). Each tie line `(k′, k)` — region bus k′ to station PCC k —
//! contributes four duplicated quantities: the AC region keeps its native
//! `(V_k′, θ_k′)` and holds copies of the station-side `(V_k, θ_k)`, while
//! the MTDC problem owns the station variables natively and copies the
//! region side. Four consensus rows per tie, ordered `V_k, V_k′, θ_k,
//! θ_k′`, force each copy to equal its original:
//!
//! ```txt
//!   Σ_ℓ A_ℓ x_ℓ = 0,   one +1 (AC side) and one −1 (MTDC side) per row,
//! ```
//!
//! so `Σ_ℓ A_ℓ A_ℓᵀ = 2·I`. The union of subproblem constraints equals the
//! centralized constraint set row for row (shared names, shared
//! expressions), which is what makes distributed and centralized optima
//! directly comparable.

use std::collections::HashMap;

use crate::formulation::{
    build_ac_region, build_central, build_mtdc, AcSubLayout, MtdcSubLayout,
};
use crate::model::Network;
use crate::nlp::Nlp;

/// Sparse consensus block `A_ℓ` (entries are ±1).
#[derive(Debug, Clone)]
pub struct ConsensusA {
    pub q: usize,
    pub n: usize,
    /// `(row, col, value)` triplets, row-sorted.
    pub trips: Vec<(usize, usize, f64)>,
}

impl ConsensusA {
    /// `y += A·x`.
    pub fn mul_add(&self, x: &[f64], y: &mut [f64]) {
        for &(r, c, v) in &self.trips {
            y[r] += v * x[c];
        }
    }

    /// `A·x`.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.q];
        self.mul_add(x, &mut y);
        y
    }

    /// `Aᵀ·y`.
    pub fn mul_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for &(r, c, v) in &self.trips {
            out[c] += v * y[r];
        }
        out
    }
}

/// One subproblem of the decomposition.
#[derive(Debug, Clone)]
pub struct Region {
    /// "r1", "r2", … for AC regions; "dc" for the MTDC problem.
    pub name: String,
    pub nlp: Nlp,
    pub a: ConsensusA,
    /// Diagonal of the scaling matrix Σ_ℓ used by ALADIN's augmented
    /// penalty: 1/(ub−lb) for finitely boxed variables, 1 otherwise.
    pub sigma: Vec<f64>,
    /// Local variable → centralized variable.
    pub to_central: Vec<usize>,
    /// False exactly for the duplicated boundary copies.
    pub is_native: Vec<bool>,
    /// Local equality row → centralized equality row (shared names).
    pub eq_to_central: Vec<usize>,
    /// Local inequality row → centralized inequality row.
    pub ineq_to_central: Vec<usize>,
}

/// The decomposed problem: AC regions first, the MTDC subproblem last
/// (when the network has one).
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub regions: Vec<Region>,
    /// Number of consensus rows (4 per converter tie line).
    pub q: usize,
    /// Size of the centralized variable vector the mappings refer to.
    pub n_central: usize,
    pub ac_layouts: Vec<AcSubLayout>,
    pub mtdc_layout: Option<MtdcSubLayout>,
}

impl Decomposition {
    /// `Σ_ℓ A_ℓ x_ℓ` — the consensus residual; its max-norm is the
    /// distributed algorithms' primal convergence measure.
    pub fn consensus_residual(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        let mut r = vec![0.0; self.q];
        for (region, x) in self.regions.iter().zip(xs) {
            region.a.mul_add(x, &mut r);
        }
        r
    }

    /// Scatter native local values into a centralized-layout vector.
    /// Every centralized variable has exactly one native owner.
    pub fn collect_central(&self, xs: &[Vec<f64>]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_central];
        for (region, xl) in self.regions.iter().zip(xs) {
            for i in 0..xl.len() {
                if region.is_native[i] {
                    x[region.to_central[i]] = xl[i];
                }
            }
        }
        x
    }

    /// `max_ℓ max_i |x_ℓ[i] − x*[map(i)]|` over native variables only —
    /// the distance of a distributed iterate from a centralized solution.
    pub fn x_err_inf(&self, xs: &[Vec<f64>], x_central: &[f64]) -> f64 {
        let mut err = 0.0f64;
        for (region, xl) in self.regions.iter().zip(xs) {
            for i in 0..xl.len() {
                if region.is_native[i] {
                    err = err.max((xl[i] - x_central[region.to_central[i]]).abs());
                }
            }
        }
        err
    }

    /// Flat-start local vectors (each subproblem's own `x0`).
    pub fn flat_xs(&self) -> Vec<Vec<f64>> {
        self.regions.iter().map(|r| r.nlp.x0.clone()).collect()
    }
}

fn sigma_diag(nlp: &Nlp) -> Vec<f64> {
    (0..nlp.n)
        .map(|i| {
            let (lo, hi) = (nlp.lb[i], nlp.ub[i]);
            if lo == hi || !lo.is_finite() || !hi.is_finite() {
                1.0
            } else {
                1.0 / (hi - lo)
            }
        })
        .collect()
}

fn name_map(names: &[String]) -> HashMap<&str, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect()
}

fn map_rows(local: &[String], central: &HashMap<&str, usize>) -> Vec<usize> {
    local
        .iter()
        .map(|n| {
            *central
                .get(n.as_str())
                .unwrap_or_else(|| panic!("row {n} missing from centralized problem"))
        })
        .collect()
}

/// Split the network into per-region and MTDC subproblems with consensus
/// coupling. Works for pure-AC networks too (no MTDC subproblem, `q = 0`).
pub fn decompose(net: &Network) -> Decomposition {
    let (central, _) = build_central(net);
    let central_vars = name_map(&central.var_names);
    let central_eq = name_map(&central.eq_names);
    let central_ineq = name_map(&central.ineq_names);

    let q = 4 * net.mtdc.stations.len();
    let mut regions = Vec::new();
    let mut ac_layouts = Vec::new();

    for ridx in 0..net.regions.len() {
        let (nlp, layout) = build_ac_region(net, ridx);
        let mut to_central = Vec::with_capacity(nlp.n);
        let mut is_native = vec![true; nlp.n];
        for name in &nlp.var_names {
            // Natives share the centralized name; copies map to the
            // original they duplicate.
            let central_name: String = match name.split(".cp.").nth(1) {
                None => name.clone(),
                Some(rest) => rest.split('.').collect::<Vec<_>>().join("."),
            };
            to_central.push(*central_vars.get(central_name.as_str()).unwrap_or_else(|| {
                panic!("variable {central_name} missing from centralized problem")
            }));
        }
        let mut trips = Vec::new();
        for copy in &layout.copies {
            let s = copy.station;
            let st = &net.mtdc.stations[s];
            is_native[copy.v] = false;
            is_native[copy.th] = false;
            // Rows per tie: V_k, V_k′, θ_k, θ_k′ — the AC side carries +1.
            trips.push((4 * s, copy.v, 1.0));
            trips.push((4 * s + 1, layout.vars.v[st.ac_bus], 1.0));
            trips.push((4 * s + 2, copy.th, 1.0));
            trips.push((4 * s + 3, layout.vars.th[st.ac_bus], 1.0));
        }
        trips.sort_by_key(|&(r, c, _)| (r, c));
        let sigma = sigma_diag(&nlp);
        regions.push(Region {
            name: format!("r{}", net.regions[ridx].id),
            a: ConsensusA {
                q,
                n: nlp.n,
                trips,
            },
            sigma,
            to_central,
            is_native,
            eq_to_central: map_rows(&nlp.eq_names, &central_eq),
            ineq_to_central: map_rows(&nlp.ineq_names, &central_ineq),
            nlp,
        });
        ac_layouts.push(layout);
    }

    let mtdc_layout = if net.mtdc.is_empty() {
        None
    } else {
        let (nlp, layout) = build_mtdc(net);
        let mut to_central = Vec::with_capacity(nlp.n);
        let mut is_native = vec![true; nlp.n];
        for name in &nlp.var_names {
            let central_name: String = match name.split(".cp.").nth(1) {
                None => name.clone(),
                Some(rest) => {
                    // "vsc3.vkp" duplicates the region-side bus of station 3.
                    let station_id: u32 = rest
                        .trim_start_matches("vsc")
                        .split('.')
                        .next()
                        .unwrap()
                        .parse()
                        .expect("station id in copy name");
                    let st = net
                        .mtdc
                        .stations
                        .iter()
                        .find(|s| s.id == station_id)
                        .expect("station for copy");
                    let region = &net.regions[st.region];
                    let bus_id = region.buses[st.ac_bus].id;
                    if rest.ends_with("vkp") {
                        format!("r{}.V{}", region.id, bus_id)
                    } else {
                        format!("r{}.th{}", region.id, bus_id)
                    }
                }
            };
            to_central.push(*central_vars.get(central_name.as_str()).unwrap_or_else(|| {
                panic!("variable {central_name} missing from centralized problem")
            }));
        }
        let mut trips = Vec::new();
        for (s, copy) in layout.copies.iter().enumerate() {
            is_native[copy.v] = false;
            is_native[copy.th] = false;
            // The MTDC side carries the −1 of each consensus row.
            trips.push((4 * s, layout.stations[s].vk, -1.0));
            trips.push((4 * s + 1, copy.v, -1.0));
            trips.push((4 * s + 2, layout.stations[s].thk, -1.0));
            trips.push((4 * s + 3, copy.th, -1.0));
        }
        trips.sort_by_key(|&(r, c, _)| (r, c));
        let sigma = sigma_diag(&nlp);
        regions.push(Region {
            name: "dc".to_string(),
            a: ConsensusA {
                q,
                n: nlp.n,
                trips,
            },
            sigma,
            to_central,
            is_native,
            eq_to_central: map_rows(&nlp.eq_names, &central_eq),
            ineq_to_central: map_rows(&nlp.ineq_names, &central_ineq),
            nlp,
        });
        Some(layout)
    };

    Decomposition {
        regions,
        q,
        n_central: central.n,
        ac_layouts,
        mtdc_layout,
    }
}
