//! ALADIN over the decomposed OPF: augmented-Lagrangian local solves, a
//! sensitivity exchange (gradient, regularized Hessian, active-constraint
//! Jacobian), one coupled QP at the coordinator, and full-step updates.
//!
//! Per iteration:
//!
//! 1. every region solves `min f_ℓ(x) + λᵀA_ℓx + (ρ/2)‖x − z_ℓ‖²_Σℓ`
//!    subject to its own constraints (in parallel);
//! 2. terminate if `‖Σ A_ℓ x_ℓ‖∞ ≤ ε` and `max_ℓ ‖Σ_ℓ(x_ℓ − z_ℓ)‖∞ ≤ ε`;
//! 3. each region extracts `g_ℓ = ∇f_ℓ`, a positive-definite Hessian `H_ℓ`
//!    (exact + eigenvalue flip, or damped BFGS) and the Jacobian `J_ℓ` of
//!    the constraints active at `x_ℓ`;
//! 4. the coordinator solves the coupled QP (see [`qp`]) for the Newton-like
//!    steps `Δx_ℓ` and fresh consensus prices `λ_qp`;
//! 5. full-step updates `z_ℓ⁺ = x_ℓ + Δx_ℓ`, `λ⁺ = λ_qp`.
//!
//! The QP treats only the active constraints as equalities, which is what
//! buys the fast local convergence; the slack `s` keeps it feasible even
//! while consensus is still violated.

pub mod qp;
pub mod sensitivity;

use rayon::prelude::*;

use crate::admm::{DistIter, DistributedRun};
use crate::nlp::{Ipm, IpmSettings, Nlp, QuadraticModifier, Solution, SolveStatus};
use crate::partition::{Decomposition, Region};
use nalgebra::{DMatrix, DVector};

pub use qp::{solve_coupled_qp, solve_dense_kkt, solution_deviation, QpRegion, QpSolution};
pub use sensitivity::{active_row_count, BfgsMemory, HessianMode, Sensitivities, EPS_H};

/// ALADIN parameters. The default profile is the exact-Hessian setting
/// (ρ = 100, μ = 1000); [`AladinSettings::bfgs`] selects the quasi-Newton
/// profile with its heavier proximal weight.
#[derive(Debug, Clone)]
pub struct AladinSettings {
    /// Proximal penalty ρ of the local solves.
    pub rho: f64,
    /// Slack penalty μ of the coupled QP.
    pub mu: f64,
    /// Termination tolerance ε for both convergence norms.
    pub eps: f64,
    pub max_iter: usize,
    pub hessian: HessianMode,
    /// Multiplies ρ every iteration; 1.0 leaves the penalty fixed.
    pub rho_ramp: f64,
    /// When set, every coupled QP is re-solved through a dense
    /// factorization of the full KKT matrix and the worst deviation is
    /// recorded — the built-in correctness oracle.
    pub qp_oracle: bool,
    /// Interior-point settings for the local solves; also supplies the
    /// activity tolerance for the Jacobians.
    pub subproblem: IpmSettings,
}

impl Default for AladinSettings {
    fn default() -> Self {
        AladinSettings {
            rho: 1e2,
            mu: 1e3,
            eps: 1e-4,
            max_iter: 200,
            hessian: HessianMode::Exact,
            rho_ramp: 1.0,
            qp_oracle: false,
            subproblem: IpmSettings::default(),
        }
    }
}

impl AladinSettings {
    /// Quasi-Newton profile: identity-seeded damped BFGS Hessians with a
    /// stronger proximal pull.
    pub fn bfgs() -> Self {
        AladinSettings {
            rho: 1e4,
            hessian: HessianMode::Bfgs,
            ..AladinSettings::default()
        }
    }
}

/// Optional initial targets and consensus prices (defaults: the flat starts
/// and zero). Used to restart from, or probe around, a known point.
#[derive(Debug, Clone)]
pub struct AladinInit {
    pub zs: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
}

/// Full record of an ALADIN run: the shared distributed-run shape plus the
/// algorithm's own state and enough per-iteration data to audit it.
#[derive(Debug, Clone)]
pub struct AladinRun {
    pub run: DistributedRun,
    /// Final consensus prices.
    pub lambda: Vec<f64>,
    /// Final targets (z after the last update).
    pub zs: Vec<Vec<f64>>,
    /// Final local solutions with their multipliers.
    pub locals: Vec<Solution>,
    /// Local solutions per iteration (one inner vector per region).
    pub xs_history: Vec<Vec<Vec<f64>>>,
    /// Targets fed into each iteration (same layout).
    pub zs_history: Vec<Vec<Vec<f64>>>,
    /// Active-Jacobian row counts per region, recorded for every iteration
    /// that exchanged sensitivities (a converged run stops before its last
    /// exchange, so this has one entry fewer than the history).
    pub active_counts: Vec<Vec<usize>>,
    /// Worst deviation between the Schur-eliminated QP solution and the
    /// dense-KKT oracle (0 when the oracle is off).
    pub qp_oracle_max_dev: f64,
    /// Worst KKT residual reported by the coupled QP solves.
    pub qp_kkt_residual_max: f64,
    /// Smallest regularized Hessian eigenvalue seen (exact mode).
    pub min_eig_min: f64,
    pub bfgs_damped: u64,
    pub bfgs_skipped: u64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &a| m.max(a.abs()))
}

/// Forward floats one sensitivity exchange costs under the worst-case dense
/// accounting: `n + n(n+1)/2 + n·a` per region with an exact Hessian,
/// `3n + n·a` with BFGS (`a` = active-Jacobian rows).
pub fn comm_floats_per_exchange(mode: HessianMode, dims: &[(usize, usize)]) -> u64 {
    dims.iter()
        .map(|&(n, a)| {
            let (n, a) = (n as u64, a as u64);
            match mode {
                HessianMode::Exact => n + n * (n + 1) / 2 + n * a,
                HessianMode::Bfgs => 3 * n + n * a,
            }
        })
        .sum()
}

/// Independent first-order check at a regional primal-dual point: the
/// ∞-norm of `∇f + Σν∇c + Σκ∇h + (bound terms) + A_ℓᵀλ`, evaluated straight
/// from the expression oracles.
pub fn regional_kkt_gap(region: &Region, sol: &Solution, lambda: &[f64]) -> f64 {
    let nlp = &region.nlp;
    let mut st = vec![0.0; nlp.n];
    nlp.objective.add_gradient(&sol.x, 1.0, &mut st);
    for (r, e) in nlp.eq.iter().enumerate() {
        e.add_gradient(&sol.x, sol.nu[r], &mut st);
    }
    for (&i, &w) in nlp.fixed_vars().iter().zip(&sol.fixed_nu) {
        st[i] += w;
    }
    for (r, h) in nlp.ineq.iter().enumerate() {
        h.add_gradient(&sol.x, sol.kappa[r], &mut st);
    }
    for i in 0..nlp.n {
        st[i] += sol.gamma_up[i] - sol.gamma_lo[i];
    }
    let at_lambda = region.a.mul_transpose(lambda);
    for i in 0..nlp.n {
        st[i] += at_lambda[i];
    }
    inf_norm(&st)
}

struct LocalState {
    ipm: Ipm,
    /// Region's NLP with a mutable starting point (set to the current
    /// target before every solve).
    nlp: Nlp,
    warm: Option<Solution>,
    z: Vec<f64>,
    sol: Option<Solution>,
    bfgs: Option<BfgsMemory>,
    sens: Option<Sensitivities>,
}

/// Run ALADIN on a decomposition. `x_ref` (a centralized solution) enables
/// the per-iteration `x_err_inf` metric; `init` overrides the flat-start
/// targets and zero prices.
pub fn solve_aladin(
    dec: &Decomposition,
    settings: &AladinSettings,
    x_ref: Option<&[f64]>,
    init: Option<AladinInit>,
) -> AladinRun {
    let q = dec.q;
    // Without coupling the subproblems already are the whole problem: solve
    // them plainly once and skip the consensus machinery.
    let mut rho = if q == 0 { 0.0 } else { settings.rho };
    let tau = settings.subproblem.tau_act;
    let start = std::time::Instant::now();

    let (mut zs_init, mut lambda) = (None, vec![0.0; q]);
    if let Some(init) = init {
        assert_eq!(init.lambda.len(), q, "init λ dimension");
        assert_eq!(init.zs.len(), dec.regions.len(), "init z region count");
        lambda = init.lambda;
        zs_init = Some(init.zs);
    }

    let mut states: Vec<LocalState> = dec
        .regions
        .iter()
        .enumerate()
        .map(|(l, r)| LocalState {
            ipm: Ipm::new(&r.nlp),
            nlp: r.nlp.clone(),
            warm: None,
            z: zs_init
                .as_mut()
                .map(|zs| std::mem::take(&mut zs[l]))
                .unwrap_or_else(|| r.nlp.x0.clone()),
            sol: None,
            bfgs: match settings.hessian {
                HessianMode::Bfgs => Some(BfgsMemory::new(r.nlp.n)),
                HessianMode::Exact => None,
            },
            sens: None,
        })
        .collect();

    // Dense per-region consensus blocks A_ℓᵀ, used by the QP every iteration.
    let a_ts: Vec<DMatrix<f64>> = dec
        .regions
        .iter()
        .map(|r| {
            let mut a_t = DMatrix::zeros(r.nlp.n, q);
            for &(row, col, v) in &r.a.trips {
                a_t[(col, row)] += v;
            }
            a_t
        })
        .collect();

    let mut history: Vec<DistIter> = Vec::new();
    let mut xs_history = Vec::new();
    let mut zs_history = Vec::new();
    let mut active_counts: Vec<Vec<usize>> = Vec::new();
    let mut comm_floats = 0u64;
    let mut converged = false;
    let mut iterations = 0;
    let mut subproblem_strain = 0u64;
    let mut failure: Option<String> = None;
    let mut qp_oracle_max_dev = 0.0f64;
    let mut qp_kkt_residual_max = 0.0f64;
    let mut min_eig_min = f64::INFINITY;

    'outer: for iter in 0..settings.max_iter {
        // --- 1. Local augmented solves (parallel) -------------------------
        let statuses: Vec<SolveStatus> = states
            .par_iter_mut()
            .zip(dec.regions.par_iter())
            .map(|(st, region)| {
                let modif = QuadraticModifier {
                    lin: region.a.mul_transpose(&lambda),
                    prox_weight: region.sigma.iter().map(|s| rho * s).collect(),
                    prox_center: st.z.clone(),
                };
                st.nlp.x0.copy_from_slice(&st.z);
                let warm = st.warm.as_ref().map(|w| {
                    let mut w = w.clone();
                    w.x = st.z.clone();
                    w
                });
                let sol = st
                    .ipm
                    .solve(&st.nlp, &modif, warm.as_ref(), &settings.subproblem);
                let status = sol.status;
                st.warm = Some(sol.clone());
                st.sol = Some(sol);
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

        // --- 2. Metrics and termination ------------------------------------
        let mut r_cons = vec![0.0; q];
        let mut dual_inf = 0.0f64;
        for (st, region) in states.iter().zip(&dec.regions) {
            let x = &st.sol.as_ref().unwrap().x;
            region.a.mul_add(x, &mut r_cons);
            for i in 0..x.len() {
                dual_inf = dual_inf.max((region.sigma[i] * (x[i] - st.z[i])).abs());
            }
        }
        let consensus_inf = inf_norm(&r_cons);
        let objective: f64 = states
            .iter()
            .map(|st| st.nlp.objective_value(&st.sol.as_ref().unwrap().x))
            .sum();
        let xs_now: Vec<Vec<f64>> = states
            .iter()
            .map(|st| st.sol.as_ref().unwrap().x.clone())
            .collect();
        let x_err = x_ref.map(|xr| dec.x_err_inf(&xs_now, xr));
        history.push(DistIter {
            iter,
            consensus_inf,
            dual_inf,
            objective,
            x_err_inf: x_err,
            comm_floats,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        zs_history.push(states.iter().map(|st| st.z.clone()).collect::<Vec<_>>());
        xs_history.push(xs_now);

        if consensus_inf <= settings.eps && (q == 0 || dual_inf <= settings.eps) {
            converged = true;
            break;
        }

        // --- 3. Sensitivities (parallel) -----------------------------------
        states
            .par_iter_mut()
            .zip(dec.regions.par_iter())
            .for_each(|(st, _)| {
                let sol = st.sol.as_ref().unwrap();
                let sens = match st.bfgs.as_mut() {
                    None => sensitivity::extract_exact(&st.nlp, sol, tau),
                    Some(mem) => {
                        mem.absorb(&st.nlp, sol);
                        sensitivity::extract_bfgs(&st.nlp, sol, tau, mem)
                    }
                };
                st.sens = Some(sens);
            });
        let dims: Vec<(usize, usize)> = states
            .iter()
            .map(|st| {
                let sens = st.sens.as_ref().unwrap();
                (st.nlp.n, sens.j.nrows())
            })
            .collect();
        for st in &states {
            min_eig_min = min_eig_min.min(st.sens.as_ref().unwrap().min_eig);
        }
        active_counts.push(dims.iter().map(|&(_, a)| a).collect());
        comm_floats += comm_floats_per_exchange(settings.hessian, &dims);
        if let Some(row) = history.last_mut() {
            row.comm_floats = comm_floats;
        }

        // --- 4. Coupled QP at the coordinator -------------------------------
        let qp_regions: Vec<QpRegion> = states
            .iter()
            .zip(&dec.regions)
            .zip(&a_ts)
            .map(|((st, region), a_t)| {
                let sens = st.sens.as_ref().unwrap();
                QpRegion {
                    h: sens.h.clone(),
                    j: sens.j.clone(),
                    g: sens.g.clone(),
                    a_t: a_t.clone(),
                    ax: DVector::from(region.a.mul(&st.sol.as_ref().unwrap().x)),
                }
            })
            .collect();
        let lambda_v = DVector::from_column_slice(&lambda);
        let qp_sol = match solve_coupled_qp(&qp_regions, &lambda_v, settings.mu) {
            Ok(s) => s,
            Err(e) => {
                failure = Some(format!("coupled QP failed at iteration {iter}: {e}"));
                break;
            }
        };
        qp_kkt_residual_max = qp_kkt_residual_max.max(qp_sol.kkt_residual);
        if std::env::var_os("ALADIN_DEBUG").is_some() {
            let dxmax = qp_sol.dx.iter().map(|d| d.amax()).fold(0.0f64, f64::max);
            eprintln!(
                "[qp] iter={iter} resid={:.3e} |dx|={:.3e} |lam_qp|={:.3e} |s|={:.3e}",
                qp_sol.kkt_residual,
                dxmax,
                qp_sol.lambda_qp.amax(),
                qp_sol.s.amax()
            );
        }
        if settings.qp_oracle {
            match solve_dense_kkt(&qp_regions, &lambda_v, settings.mu) {
                Ok(dense) => {
                    qp_oracle_max_dev =
                        qp_oracle_max_dev.max(solution_deviation(&qp_sol, &dense));
                }
                Err(e) => {
                    failure = Some(format!("dense KKT oracle failed at iteration {iter}: {e}"));
                    break;
                }
            }
        }

        // --- 5. Full-step updates -------------------------------------------
        for (l, st) in states.iter_mut().enumerate() {
            let x = &st.sol.as_ref().unwrap().x;
            for i in 0..st.z.len() {
                st.z[i] = x[i] + qp_sol.dx[l][i];
            }
        }
        lambda.copy_from_slice(qp_sol.lambda_qp.as_slice());
        rho *= settings.rho_ramp;
    }

    let (xs, locals): (Vec<Vec<f64>>, Vec<Solution>) = states
        .iter()
        .map(|st| {
            let sol = st.sol.clone().unwrap_or_else(|| {
                // A run that failed before its first solve completed still
                // reports the flat start.
                Solution {
                    status: SolveStatus::NumericalFailure,
                    x: st.nlp.x0.clone(),
                    objective: f64::NAN,
                    iterations: 0,
                    kkt_error: f64::NAN,
                    nu: vec![0.0; st.nlp.eq.len()],
                    fixed_nu: vec![0.0; st.nlp.fixed_vars().len()],
                    kappa: vec![0.0; st.nlp.ineq.len()],
                    gamma_lo: vec![0.0; st.nlp.n],
                    gamma_up: vec![0.0; st.nlp.n],
                    slack: vec![],
                    kappa_all: vec![],
                    nu_all: vec![],
                    iter_log: vec![],
                }
            });
            (sol.x.clone(), sol)
        })
        .unzip();
    let (bfgs_damped, bfgs_skipped) = states
        .iter()
        .filter_map(|st| st.bfgs.as_ref())
        .fold((0, 0), |(d, s), m| (d + m.damped, s + m.skipped));

    AladinRun {
        run: DistributedRun {
            converged,
            iterations,
            xs,
            history,
            comm_floats,
            // The ΣA_ℓz_ℓ = 0 identity is ADMM's averaging-step property;
            // ALADIN's targets satisfy the QP rows instead.
            z_consensus_max: 0.0,
            subproblem_strain,
            failure,
        },
        lambda,
        zs: states.iter().map(|st| st.z.clone()).collect(),
        locals,
        xs_history,
        zs_history,
        active_counts,
        qp_oracle_max_dev,
        qp_kkt_residual_max,
        min_eig_min,
        bfgs_damped,
        bfgs_skipped,
    }
}
