//! Result extraction: cost decomposition and physical-unit conversions.

use crate::formulation::RegionVarIds;
use crate::model::Network;

/// Objective decomposition of a dispatch: the generation cost in $/h, the
/// system losses (total generation minus total load) in MW, and the
/// combined objective `generation + η·losses`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costs {
    pub generation_dollar: f64,
    pub losses_mw: f64,
    pub objective: f64,
}

/// Evaluate the cost decomposition at `x`, where `regions[r]` holds the
/// variable ids of region `r` in the same vector `x` lives in (works for
/// the centralized layout and, per region, for subproblem layouts).
pub fn costs(net: &Network, regions: &[RegionVarIds], x: &[f64]) -> Costs {
    let base = net.base_mva;
    let mut generation = 0.0;
    let mut gen_pu = 0.0;
    let mut load_pu = 0.0;
    for (ids, region) in regions.iter().zip(&net.regions) {
        for (gi, g) in region.gens.iter().enumerate() {
            let p_mw = x[ids.pg[gi]] * base;
            generation += g.cost[0] * p_mw * p_mw + g.cost[1] * p_mw + g.cost[2];
            gen_pu += x[ids.pg[gi]];
        }
        load_pu += region.total_load().0;
    }
    let losses_mw = (gen_pu - load_pu) * base;
    Costs {
        generation_dollar: generation,
        losses_mw,
        objective: generation + net.eta * losses_mw,
    }
}
