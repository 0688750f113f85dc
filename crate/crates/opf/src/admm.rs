//! Consensus ADMM over the decomposed OPF.
//!
//! Each iteration solves every subproblem under a linear multiplier term
//! and a proximal penalty around its consensus target `z_ℓ`,
//!
//! ```txt
//!   x_ℓ⁺ = argmin  f_ℓ(x) + ξ_ℓᵀx + (ρ/2)‖x − z_ℓ‖²   s.t. local constraints,
//! ```
//!
//! updates the multipliers `ξ_ℓ⁺ = ξ_ℓ + ρ(x_ℓ⁺ − z_ℓ)`, and recenters the
//! targets by projecting onto the consensus subspace: with
//! `ν = (Σ A_ℓA_ℓᵀ)⁻¹ (ρ·ΣA_ℓx_ℓ⁺ + ΣA_ℓξ_ℓ⁺)` the new targets are
//! `z_ℓ⁺ = x_ℓ⁺ + (ξ_ℓ⁺ − A_ℓᵀν)/ρ`, which satisfy `Σ A_ℓ z_ℓ⁺ = 0`
//! identically. The penalty weight ρ stays fixed; convergence is declared
//! on the consensus residual `‖Σ A_ℓ x_ℓ⁺‖∞`.
//!
//! Local solves run in parallel (they are independent by construction);
//! all cross-region reductions are sequential in region order, so runs are
//! bitwise reproducible at any thread count.

use rayon::prelude::*;

use crate::nlp::{Ipm, IpmSettings, QuadraticModifier, Solution, SolveStatus};
use crate::partition::Decomposition;

#[derive(Debug, Clone)]
pub struct AdmmSettings {
    /// Proximal/multiplier step weight ρ.
    pub rho: f64,
    /// Consensus tolerance ‖ΣA_ℓx_ℓ‖∞.
    pub eps: f64,
    pub max_iter: usize,
    /// Interior-point settings for the local solves.
    pub subproblem: IpmSettings,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        AdmmSettings {
            rho: 1e4,
            eps: 1e-4,
            max_iter: 30_000,
            subproblem: IpmSettings::default(),
        }
    }
}

/// One row of a distributed run's convergence trace.
#[derive(Debug, Clone, Copy)]
pub struct DistIter {
    pub iter: usize,
    /// ‖Σ A_ℓ x_ℓ‖∞ after the local solves.
    pub consensus_inf: f64,
    /// Dual-progress measure; for ADMM `‖Σ A_ℓ (x_ℓ⁺ − z_ℓ)‖∞` against the
    /// pre-update targets.
    pub dual_inf: f64,
    /// Σ f_ℓ(x_ℓ) — the plain objective without penalty terms.
    pub objective: f64,
    /// Distance to a reference solution over native variables, when one
    /// was supplied.
    pub x_err_inf: Option<f64>,
    /// Cumulative floats exchanged through the coordinator.
    pub comm_floats: u64,
    pub elapsed_s: f64,
}

/// Result of a distributed solve (ADMM or ALADIN).
#[derive(Debug, Clone)]
pub struct DistributedRun {
    pub converged: bool,
    pub iterations: usize,
    /// Final local primal vectors, one per subproblem.
    pub xs: Vec<Vec<f64>>,
    pub history: Vec<DistIter>,
    pub comm_floats: u64,
    /// Largest observed violation of the internal consensus identity
    /// `Σ A_ℓ z_ℓ = 0` (should be rounding-level; always 0 for ALADIN,
    /// whose targets satisfy the QP rows instead).
    pub z_consensus_max: f64,
    /// Local solves that ran into their iteration cap (the iterate is still
    /// used; a persistent count signals the penalty setup is fighting the
    /// subproblems).
    pub subproblem_strain: u64,
    /// A numerical breakdown that ended the run early; the history up to
    /// that point is preserved.
    pub failure: Option<String>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &a| m.max(a.abs()))
}

struct LocalState {
    ipm: Ipm,
    warm: Option<Solution>,
    xi: Vec<f64>,
    z: Vec<f64>,
    x: Vec<f64>,
}

/// Run consensus ADMM. `x_ref` (a centralized solution in the centralized
/// layout) enables the per-iteration `x_err_inf` metric.
pub fn solve_admm(
    dec: &Decomposition,
    settings: &AdmmSettings,
    x_ref: Option<&[f64]>,
) -> DistributedRun {
    // With no consensus rows the subproblems are fully independent and the
    // proximal machinery would only bias them; solve them plainly instead.
    let rho = if dec.q == 0 { 0.0 } else { settings.rho };
    let start = std::time::Instant::now();

    let mut states: Vec<LocalState> = dec
        .regions
        .iter()
        .map(|r| LocalState {
            ipm: Ipm::new(&r.nlp),
            warm: None,
            xi: vec![0.0; r.nlp.n],
            z: r.nlp.x0.clone(),
            x: r.nlp.x0.clone(),
        })
        .collect();

    // Floats exchanged per iteration: every subproblem uploads x_ℓ and
    // downloads z_ℓ.
    let comm_per_iter: u64 = dec.regions.iter().map(|r| 2 * r.nlp.n as u64).sum();

    let mut history = Vec::new();
    let mut comm_floats = 0u64;
    let mut z_consensus_max = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;

    let mut subproblem_strain = 0u64;
    let mut failure: Option<String> = None;

    'outer: for iter in 0..settings.max_iter {
        // --- Local proximal solves (parallel) ---------------------------
        let statuses: Vec<SolveStatus> = states
            .par_iter_mut()
            .zip(dec.regions.par_iter())
            .map(|(st, region)| {
                let modif = QuadraticModifier {
                    lin: st.xi.clone(),
                    prox_weight: vec![rho; region.nlp.n],
                    prox_center: st.z.clone(),
                };
                // Start the primal iterate at the broadcast target: keying
                // the start to the previous local solution makes the
                // subproblems track whichever local attractor they last
                // visited, and the outer iteration can then cycle between
                // attractors instead of damping onto the consensus point.
                let warm = st.warm.as_ref().map(|w| {
                    let mut w = w.clone();
                    w.x = st.z.clone();
                    w
                });
                let sol = st
                    .ipm
                    .solve(&region.nlp, &modif, warm.as_ref(), &settings.subproblem);
                let status = sol.status;
                st.x = sol.x.clone();
                st.warm = Some(sol);
                status
            })
            .collect();
        for (l, status) in statuses.iter().enumerate() {
            match status {
                SolveStatus::NumericalFailure => {
                    failure = Some(format!(
                        "subproblem {} failed numerically at iteration {iter}",
                        dec.regions[l].name
                    ));
                    break 'outer;
                }
                SolveStatus::Solved => {}
                _ => subproblem_strain += 1,
            }
        }
        iterations = iter + 1;
        comm_floats += comm_per_iter;

        // --- Metrics ------------------------------------------------------
        let mut r_cons = vec![0.0; dec.q];
        let mut r_dual = vec![0.0; dec.q];
        for (st, region) in states.iter().zip(&dec.regions) {
            region.a.mul_add(&st.x, &mut r_cons);
            let dz: Vec<f64> = st.x.iter().zip(&st.z).map(|(a, b)| a - b).collect();
            region.a.mul_add(&dz, &mut r_dual);
        }
        let consensus_inf = inf_norm(&r_cons);
        let objective: f64 = states
            .iter()
            .zip(&dec.regions)
            .map(|(st, r)| r.nlp.objective_value(&st.x))
            .sum();
        let xs_now: Vec<&Vec<f64>> = states.iter().map(|s| &s.x).collect();
        let x_err = x_ref.map(|xr| {
            let mut err = 0.0f64;
            for (region, xl) in dec.regions.iter().zip(&xs_now) {
                for i in 0..xl.len() {
                    if region.is_native[i] {
                        err = err.max((xl[i] - xr[region.to_central[i]]).abs());
                    }
                }
            }
            err
        });
        history.push(DistIter {
            iter,
            consensus_inf,
            dual_inf: inf_norm(&r_dual),
            objective,
            x_err_inf: x_err,
            comm_floats,
            elapsed_s: start.elapsed().as_secs_f64(),
        });

        if consensus_inf <= settings.eps {
            converged = true;
            break;
        }

        // --- Consensus projection: ν and new targets ---------------------
        // ΣA_ℓA_ℓᵀ = 2I, so ν = (ρ·ΣA_ℓx_ℓ + ΣA_ℓξ_ℓ)/2.
        let mut nu = vec![0.0; dec.q];
        for (st, region) in states.iter().zip(&dec.regions) {
            region.a.mul_add(&st.xi, &mut nu);
        }
        for r in 0..dec.q {
            nu[r] = (rho * r_cons[r] + nu[r]) / 2.0;
        }
        let mut z_sum = vec![0.0; dec.q];
        for (st, region) in states.iter_mut().zip(&dec.regions) {
            let at_nu = region.a.mul_transpose(&nu);
            for i in 0..st.z.len() {
                st.z[i] = st.x[i] + (st.xi[i] - at_nu[i]) / rho;
            }
            region.a.mul_add(&st.z, &mut z_sum);
        }
        z_consensus_max = z_consensus_max.max(inf_norm(&z_sum));

        // --- Multiplier ascent against the refreshed targets -------------
        // ξ_ℓ⁺ = ξ_ℓ + ρ(x_ℓ − z_ℓ⁺), which lands exactly on A_ℓᵀν: the
        // multipliers always price the consensus rows and stay zero on
        // variables that are not duplicated anywhere. Running the ascent
        // against the stale targets instead lets multiplier mass build up
        // on purely local variables, and that residue first slows the
        // price discovery on the tie lines and later feeds a limit cycle
        // around the consensus point.
        for st in states.iter_mut() {
            for i in 0..st.x.len() {
                st.xi[i] += rho * (st.x[i] - st.z[i]);
            }
        }
    }

    DistributedRun {
        converged,
        iterations,
        xs: states.into_iter().map(|s| s.x).collect(),
        history,
        comm_floats,
        z_consensus_max,
        subproblem_strain,
        failure,
    }
}
