//! Sensitivity extraction at a local solution: objective gradient,
//! active-constraint Jacobian, and a positive-definite Hessian — exact
//! (eigenvalue-flipped) or quasi-Newton (damped BFGS).

use nalgebra::{DMatrix, DVector};

use crate::nlp::{Nlp, Solution};

/// How the local Hessians are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HessianMode {
    /// Second derivatives of the local Lagrangian, eigen-regularized.
    Exact,
    /// Damped BFGS recursion on Lagrangian-gradient differences.
    Bfgs,
}

/// Eigenvalue floor for the regularized Hessians. Station angle groups in the
/// converter-grid block are gauge directions: the objective and every local
/// constraint are invariant under a uniform shift, so the raw Lagrangian
/// Hessian is singular along them and only the coupling rows of the
/// coordination step pin them down. The floor must be large enough that the
/// region-wise elimination of the coordination system stays well conditioned
/// (error amplification along a gauge direction scales like 1/floor), yet
/// below the smallest genuine curvature so no physical direction is distorted.
/// Observed spectra put genuine curvature at 1e-1 and above; 1e-2 leaves an
/// order of magnitude on each side.
pub const EPS_H: f64 = 1e-2;

/// Per-region sensitivity data consumed by the coupled QP.
#[derive(Debug, Clone)]
pub struct Sensitivities {
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
    pub j: DMatrix<f64>,
    /// Smallest eigenvalue of `h` after regularization (exact mode) or a
    /// lower bound certified by the update (BFGS mode).
    pub min_eig: f64,
}

/// Working set of a local solution: the inequality rows and simple bounds
/// the coordination step treats as equalities.
///
/// Detection is complementarity-aware: a row enters when its slack is
/// within `tau` of zero, or when its multiplier dominates the slack. The
/// multiplier clause keeps strongly priced rows in the set when
/// coordination noise briefly lifts an iterate off the surface — with a
/// pure distance test such rows chatter in and out of the working set and
/// the full-step updates limit-cycle around the solution instead of
/// settling onto it.
#[derive(Debug, Clone, Default)]
pub struct ActiveSet {
    /// Active inequality-row indices, ascending.
    pub ineq: Vec<usize>,
    /// Active bounds as `(variable, is_upper)`, in variable order with the
    /// upper end before the lower when both are finite.
    pub bounds: Vec<(usize, bool)>,
}

impl ActiveSet {
    pub fn len(&self) -> usize {
        self.ineq.len() + self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ineq.is_empty() && self.bounds.is_empty()
    }
}

fn binding(slack: f64, mult: f64, tau: f64) -> bool {
    slack <= tau || mult >= slack.max(1e-8)
}

/// Detect the working set at a solved subproblem from its slacks and
/// multipliers.
pub fn detect_active(nlp: &Nlp, sol: &Solution, tau: f64) -> ActiveSet {
    detect_active_parts(nlp, &sol.x, &sol.kappa, &sol.gamma_lo, &sol.gamma_up, tau)
}

/// Working-set detection from raw parts. Empty multiplier slices disable
/// the complementarity clause, leaving the pure distance test.
pub fn detect_active_parts(
    nlp: &Nlp,
    x: &[f64],
    kappa: &[f64],
    gamma_lo: &[f64],
    gamma_up: &[f64],
    tau: f64,
) -> ActiveSet {
    let mult = |m: &[f64], i: usize| m.get(i).copied().unwrap_or(0.0);
    let mut set = ActiveSet::default();
    for (i, h) in nlp.ineq.iter().enumerate() {
        if binding(-h.value(x), mult(kappa, i), tau) {
            set.ineq.push(i);
        }
    }
    for i in 0..nlp.n {
        if nlp.lb[i] == nlp.ub[i] {
            continue;
        }
        if nlp.ub[i].is_finite() && binding(nlp.ub[i] - x[i], mult(gamma_up, i), tau) {
            set.bounds.push((i, true));
        }
        if nlp.lb[i].is_finite() && binding(x[i] - nlp.lb[i], mult(gamma_lo, i), tau) {
            set.bounds.push((i, false));
        }
    }
    set
}

/// Dense Jacobian of the working-set constraints at `x`, one row per
/// constraint: equality rows first, then fixed variables, then the active
/// inequality rows, then active bounds (+1 entries for upper ends, −1 for
/// lower). Inactive rows are dropped rather than zeroed.
pub fn build_jacobian(nlp: &Nlp, x: &[f64], set: &ActiveSet) -> DMatrix<f64> {
    let rows = nlp.eq.len() + nlp.fixed_vars().len() + set.len();
    let mut j = DMatrix::zeros(rows, nlp.n);
    let mut r = 0;
    for e in &nlp.eq {
        e.grad_entries(x, 1.0, &mut |i, v| j[(r, i)] += v);
        r += 1;
    }
    for i in nlp.fixed_vars() {
        j[(r, i)] = 1.0;
        r += 1;
    }
    for &i in &set.ineq {
        nlp.ineq[i].grad_entries(x, 1.0, &mut |c, v| j[(r, c)] += v);
        r += 1;
    }
    for &(i, upper) in &set.bounds {
        j[(r, i)] = if upper { 1.0 } else { -1.0 };
        r += 1;
    }
    debug_assert_eq!(r, rows);
    j
}

/// Objective gradient ∇f at `x` (no multiplier or penalty terms).
pub fn objective_gradient(nlp: &Nlp, x: &[f64]) -> DVector<f64> {
    let mut g = vec![0.0; nlp.n];
    nlp.objective.add_gradient(x, 1.0, &mut g);
    DVector::from(g)
}

/// Gradient of the local Lagrangian f + νᵀc + κᵀh at `x` under the given
/// multipliers. Bound and fixed-variable terms are linear in `x`, so they
/// cancel in the gradient differences the BFGS recursion consumes and are
/// omitted here.
pub fn lagrangian_gradient(nlp: &Nlp, x: &[f64], nu: &[f64], kappa: &[f64]) -> DVector<f64> {
    let mut g = vec![0.0; nlp.n];
    nlp.objective.add_gradient(x, 1.0, &mut g);
    for (r, e) in nlp.eq.iter().enumerate() {
        e.add_gradient(x, nu[r], &mut g);
    }
    for (r, h) in nlp.ineq.iter().enumerate() {
        h.add_gradient(x, kappa[r], &mut g);
    }
    DVector::from(g)
}

/// Dense symmetric Hessian of the local Lagrangian at `x`.
fn lagrangian_hessian(nlp: &Nlp, x: &[f64], nu: &[f64], kappa: &[f64]) -> DMatrix<f64> {
    let n = nlp.n;
    let mut h = DMatrix::zeros(n, n);
    let mut add = |i: usize, jj: usize, v: f64| {
        h[(i, jj)] += v;
        if i != jj {
            h[(jj, i)] += v;
        }
    };
    nlp.objective.hessian_entries(x, 1.0, &mut add);
    for (r, e) in nlp.eq.iter().enumerate() {
        e.hessian_entries(x, nu[r], &mut add);
    }
    for (r, hr) in nlp.ineq.iter().enumerate() {
        hr.hessian_entries(x, kappa[r], &mut add);
    }
    h
}

/// Make a symmetric matrix positive definite by flipping negative
/// eigenvalues to their absolute values and flooring all of them at
/// [`EPS_H`]. Returns the smallest eigenvalue after the repair.
pub fn flip_regularize(h: &mut DMatrix<f64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let mut vals = eig.eigenvalues;
    let mut min = f64::INFINITY;
    for v in vals.iter_mut() {
        *v = v.abs().max(EPS_H);
        min = min.min(*v);
    }
    let scaled = &eig.eigenvectors * DMatrix::from_diagonal(&vals);
    *h = &scaled * eig.eigenvectors.transpose();
    // Symmetrize away the rounding of the triple product.
    let ht = h.transpose();
    *h += ht;
    *h *= 0.5;
    min
}

/// Exact-mode sensitivities at a solved subproblem.
pub fn extract_exact(nlp: &Nlp, sol: &Solution, tau: f64) -> Sensitivities {
    let mut h = lagrangian_hessian(nlp, &sol.x, &sol.nu, &sol.kappa);
    let min_eig = flip_regularize(&mut h);
    let set = detect_active(nlp, sol, tau);
    Sensitivities {
        g: objective_gradient(nlp, &sol.x),
        j: build_jacobian(nlp, &sol.x, &set),
        h,
        min_eig,
    }
}

/// Damped BFGS Hessian memory for one region. The matrix starts at the
/// identity and absorbs one (s, y) pair per iteration, where both gradients
/// in y are evaluated under the newest multipliers.
#[derive(Debug, Clone)]
pub struct BfgsMemory {
    h: DMatrix<f64>,
    prev_x: Option<Vec<f64>>,
    /// Pairs damped toward the Powell threshold (still applied).
    pub damped: u64,
    /// Pairs skipped entirely (degenerate step or curvature).
    pub skipped: u64,
}

impl BfgsMemory {
    pub fn new(n: usize) -> Self {
        BfgsMemory {
            h: DMatrix::identity(n, n),
            prev_x: None,
            damped: 0,
            skipped: 0,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// Absorb the newest local solution: forms s = x⁺ − x and the
    /// Lagrangian-gradient difference y at fixed (newest) multipliers, then
    /// applies the Powell-damped BFGS update. Returns `true` when an
    /// undamped pair was applied (for which Hs = y holds exactly after the
    /// update).
    pub fn absorb(&mut self, nlp: &Nlp, sol: &Solution) -> bool {
        let x_new = &sol.x;
        let Some(x_old) = self.prev_x.replace(x_new.clone()) else {
            return false;
        };
        let s = DVector::from_iterator(nlp.n, x_new.iter().zip(&x_old).map(|(a, b)| a - b));
        if s.amax() < 1e-14 {
            self.skipped += 1;
            return false;
        }
        let y = lagrangian_gradient(nlp, x_new, &sol.nu, &sol.kappa)
            - lagrangian_gradient(nlp, &x_old, &sol.nu, &sol.kappa);
        let hs = &self.h * &s;
        let shs = s.dot(&hs);
        if !(shs > 0.0) || !shs.is_finite() {
            self.skipped += 1;
            return false;
        }
        let sy = s.dot(&y);
        // Powell damping: blend y toward Hs until the curvature condition
        // sᵀr ≥ 0.2·sᵀHs holds, keeping the update positive definite.
        let (r, undamped) = if sy >= 0.2 * shs {
            (y, true)
        } else {
            self.damped += 1;
            let theta = 0.8 * shs / (shs - sy);
            (theta * y + (1.0 - theta) * &hs, false)
        };
        let sr = s.dot(&r);
        if !(sr > 0.0) || !sr.is_finite() {
            self.skipped += 1;
            return false;
        }
        self.h -= &hs * hs.transpose() / shs;
        self.h += &r * r.transpose() / sr;
        undamped
    }
}

/// BFGS-mode sensitivities: gradient and active Jacobian as in exact mode,
/// Hessian from the region's quasi-Newton memory.
pub fn extract_bfgs(nlp: &Nlp, sol: &Solution, tau: f64, mem: &BfgsMemory) -> Sensitivities {
    let set = detect_active(nlp, sol, tau);
    Sensitivities {
        g: objective_gradient(nlp, &sol.x),
        j: build_jacobian(nlp, &sol.x, &set),
        h: mem.matrix().clone(),
        min_eig: EPS_H,
    }
}
