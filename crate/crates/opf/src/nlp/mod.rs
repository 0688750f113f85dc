//! Nonlinear program container and the primal-dual interior-point solver.
//!
//! An [`Nlp`] holds the standard form
//!
//! ```txt
//!   min  f(x)            (+ optional linear/proximal modifier)
//!   s.t. c_E(x)  = 0
//!        h(x)   <= 0
//!        lb <= x <= ub
//! ```
//!
//! with all functions given as [`Expr`]/[`Ineq`] rows carrying exact sparse
//! derivatives. Variables with `lb == ub` are *fixed*: the solver treats
//! them as equality rows rather than degenerate bounds so the barrier stays
//! well defined and active-set Jacobians keep full row rank.

pub mod ipm;
pub mod sparse;

use crate::formulation::expr::{Expr, Ineq};

pub use ipm::{Ipm, IpmSettings, Solution, SolveStatus};

/// A smooth NLP in standard form. Row and variable names are carried for
/// diagnostics, result mapping and CSV output; they play no numeric role.
#[derive(Debug, Clone, Default)]
pub struct Nlp {
    pub n: usize,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    /// Default starting point (the flat start for OPF problems).
    pub x0: Vec<f64>,
    pub objective: Expr,
    pub eq: Vec<Expr>,
    pub eq_names: Vec<String>,
    pub ineq: Vec<Ineq>,
    pub ineq_names: Vec<String>,
    pub var_names: Vec<String>,
}

impl Nlp {
    /// Internal consistency of dimensions; panics on violation (these are
    /// programming errors in problem construction, not data errors).
    pub fn assert_consistent(&self) {
        assert_eq!(self.lb.len(), self.n);
        assert_eq!(self.ub.len(), self.n);
        assert_eq!(self.x0.len(), self.n);
        assert_eq!(self.var_names.len(), self.n);
        assert_eq!(self.eq_names.len(), self.eq.len());
        assert_eq!(self.ineq_names.len(), self.ineq.len());
        for i in 0..self.n {
            assert!(
                self.lb[i] <= self.ub[i],
                "variable {} has crossed bounds",
                self.var_names[i]
            );
        }
    }

    /// Indices of fixed variables (`lb == ub`).
    pub fn fixed_vars(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| self.lb[i] == self.ub[i])
            .collect()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.value(x)
    }

    pub fn eq_values(&self, x: &[f64]) -> Vec<f64> {
        self.eq.iter().map(|e| e.value(x)).collect()
    }

    pub fn ineq_values(&self, x: &[f64]) -> Vec<f64> {
        self.ineq.iter().map(|h| h.value(x)).collect()
    }

    /// Independent KKT residuals at a primal-dual point, evaluated directly
    /// from the expression oracles (no solver bookkeeping involved).
    ///
    /// `nu` covers the explicit equality rows, `fixed_nu` the implicit
    /// fixed-variable rows (aligned with [`Nlp::fixed_vars`]), `kappa` the
    /// inequality rows, and `gamma_lo`/`gamma_up` are dense bound
    /// multipliers (zero where a bound is absent).
    #[allow(clippy::too_many_arguments)]
    pub fn kkt_error(
        &self,
        x: &[f64],
        nu: &[f64],
        fixed_nu: &[f64],
        kappa: &[f64],
        gamma_lo: &[f64],
        gamma_up: &[f64],
    ) -> KktError {
        let fixed = self.fixed_vars();
        assert_eq!(nu.len(), self.eq.len());
        assert_eq!(fixed_nu.len(), fixed.len());
        assert_eq!(kappa.len(), self.ineq.len());

        // Stationarity: ∇f + J_Eᵀν + J_hᵀκ − γ_lo + γ_up (+ fixed rows).
        let mut st = vec![0.0; self.n];
        self.objective.add_gradient(x, 1.0, &mut st);
        for (r, e) in self.eq.iter().enumerate() {
            e.add_gradient(x, nu[r], &mut st);
        }
        for (&i, &w) in fixed.iter().zip(fixed_nu) {
            st[i] += w;
        }
        for (r, h) in self.ineq.iter().enumerate() {
            h.add_gradient(x, kappa[r], &mut st);
        }
        for i in 0..self.n {
            st[i] += gamma_up[i] - gamma_lo[i];
        }

        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
        let stationarity = inf(&st);

        let mut eq_violation = inf(&self.eq_values(x));
        for &i in &fixed {
            eq_violation = eq_violation.max((x[i] - self.lb[i]).abs());
        }

        let mut ineq_violation = 0.0f64;
        let mut complementarity = 0.0f64;
        for (r, h) in self.ineq.iter().enumerate() {
            let v = h.value(x);
            ineq_violation = ineq_violation.max(v.max(0.0));
            complementarity = complementarity.max((kappa[r] * v).abs());
        }
        for i in 0..self.n {
            if self.lb[i] == self.ub[i] {
                continue;
            }
            if self.lb[i].is_finite() {
                let v = self.lb[i] - x[i];
                ineq_violation = ineq_violation.max(v.max(0.0));
                complementarity = complementarity.max((gamma_lo[i] * v).abs());
            }
            if self.ub[i].is_finite() {
                let v = x[i] - self.ub[i];
                ineq_violation = ineq_violation.max(v.max(0.0));
                complementarity = complementarity.max((gamma_up[i] * v).abs());
            }
        }

        // IPOPT-style dual scaling so tolerances stay meaningful when
        // multipliers are large (costs are in $, network quantities in p.u.).
        let n_mult = (self.eq.len() + fixed.len() + kappa.len() + 2 * self.n).max(1);
        let mult_l1: f64 = nu.iter().chain(fixed_nu).chain(kappa).map(|v| v.abs()).sum::<f64>()
            + gamma_lo.iter().chain(gamma_up).map(|v| v.abs()).sum::<f64>();
        let s_d = (mult_l1 / n_mult as f64).max(100.0) / 100.0;

        KktError {
            stationarity,
            scaled_stationarity: stationarity / s_d,
            eq_violation,
            ineq_violation,
            complementarity,
        }
    }
}

/// Independent KKT residual norms from [`Nlp::kkt_error`].
#[derive(Debug, Clone, Copy)]
pub struct KktError {
    /// ∞-norm of the Lagrangian gradient.
    pub stationarity: f64,
    /// Stationarity divided by the IPOPT-style dual scaling factor.
    pub scaled_stationarity: f64,
    pub eq_violation: f64,
    pub ineq_violation: f64,
    pub complementarity: f64,
}

impl KktError {
    /// Largest of the scaled stationarity and the feasibility/complementarity
    /// norms — the single number compared against solver tolerances.
    pub fn max_scaled(&self) -> f64 {
        self.scaled_stationarity
            .max(self.eq_violation)
            .max(self.ineq_violation)
            .max(self.complementarity)
    }
}

/// Optional additive objective terms `Σ lin_i·x_i + ½·Σ w_i·(x_i − c_i)²`
/// used by the distributed algorithms (multiplier terms and proximal
/// penalties) without rebuilding the underlying [`Nlp`].
#[derive(Debug, Clone, Default)]
pub struct QuadraticModifier {
    /// Dense linear coefficients; empty = none.
    pub lin: Vec<f64>,
    /// Dense proximal weights `w_i`; empty = none.
    pub prox_weight: Vec<f64>,
    /// Proximal centers `c_i`; must match `prox_weight` when present.
    pub prox_center: Vec<f64>,
}

impl QuadraticModifier {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = 0.0;
        if !self.lin.is_empty() {
            v += self.lin.iter().zip(x).map(|(c, xi)| c * xi).sum::<f64>();
        }
        if !self.prox_weight.is_empty() {
            for i in 0..x.len() {
                let d = x[i] - self.prox_center[i];
                v += 0.5 * self.prox_weight[i] * d * d;
            }
        }
        v
    }

    pub fn add_gradient(&self, x: &[f64], g: &mut [f64]) {
        if !self.lin.is_empty() {
            for i in 0..x.len() {
                g[i] += self.lin[i];
            }
        }
        if !self.prox_weight.is_empty() {
            for i in 0..x.len() {
                g[i] += self.prox_weight[i] * (x[i] - self.prox_center[i]);
            }
        }
    }

    /// Diagonal Hessian contribution (zero when no proximal term).
    pub fn hess_diag(&self, i: usize) -> f64 {
        if self.prox_weight.is_empty() {
            0.0
        } else {
            self.prox_weight[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// min x0² + x1² s.t. x0 + x1 = 2 has optimum (1, 1) with ν = −2.
    fn tiny_qp() -> Nlp {
        let mut obj = Expr::new();
        obj.add_quad(0, 0, 1.0).add_quad(1, 1, 1.0);
        let mut eq = Expr::new();
        eq.add_lin(0, 1.0).add_lin(1, 1.0).add_const(-2.0);
        Nlp {
            n: 2,
            lb: vec![f64::NEG_INFINITY; 2],
            ub: vec![f64::INFINITY; 2],
            x0: vec![0.0; 2],
            objective: obj,
            eq: vec![eq],
            eq_names: vec!["sum".into()],
            ineq: vec![],
            ineq_names: vec![],
            var_names: vec!["x0".into(), "x1".into()],
        }
    }

    #[test]
    fn kkt_error_is_zero_at_analytic_kkt_point() {
        let nlp = tiny_qp();
        nlp.assert_consistent();
        let err = nlp.kkt_error(
            &[1.0, 1.0],
            &[-2.0],
            &[],
            &[],
            &[0.0, 0.0],
            &[0.0, 0.0],
        );
        assert!(err.max_scaled() < 1e-14, "{err:?}");
    }

    #[test]
    fn kkt_error_detects_non_stationary_point() {
        let nlp = tiny_qp();
        let err = nlp.kkt_error(
            &[1.5, 0.5],
            &[-2.0],
            &[],
            &[],
            &[0.0, 0.0],
            &[0.0, 0.0],
        );
        assert!(err.stationarity > 0.5);
    }

    #[test]
    fn modifier_value_and_gradient_agree() {
        let m = QuadraticModifier {
            lin: vec![1.0, -2.0],
            prox_weight: vec![10.0, 10.0],
            prox_center: vec![0.5, 0.5],
        };
        let x = [1.0, 2.0];
        assert_relative_eq!(
            m.value(&x),
            1.0 - 4.0 + 5.0 * 0.25 + 5.0 * 2.25,
            max_relative = 1e-14
        );
        let mut g = vec![0.0; 2];
        m.add_gradient(&x, &mut g);
        assert_relative_eq!(g[0], 1.0 + 10.0 * 0.5, max_relative = 1e-14);
        assert_relative_eq!(g[1], -2.0 + 10.0 * 1.5, max_relative = 1e-14);
    }
}
