//! Centralized reference solution of the full AC/DC OPF.

use crate::formulation::{build_central, CentralLayout};
use crate::model::Network;
use crate::nlp::{Ipm, IpmSettings, Nlp, QuadraticModifier, Solution};
use crate::report::{costs, Costs};

/// The full-problem solve: the assembled NLP, its layout, the primal-dual
/// solution, and the cost decomposition at the optimum.
#[derive(Debug, Clone)]
pub struct CentralSolution {
    pub nlp: Nlp,
    pub layout: CentralLayout,
    pub solution: Solution,
    pub costs: Costs,
}

/// Build and solve the centralized problem from a flat start. The
/// [`Solution::status`] reflects how the solve ended; callers decide
/// whether a non-`Solved` status is acceptable.
pub fn solve_centralized(net: &Network, settings: &IpmSettings) -> CentralSolution {
    let (nlp, layout) = build_central(net);
    let ipm = Ipm::new(&nlp);
    let solution = ipm.solve(&nlp, &QuadraticModifier::none(), None, settings);
    let costs = costs(net, &layout.regions, &solution.x);
    CentralSolution {
        nlp,
        layout,
        solution,
        costs,
    }
}
