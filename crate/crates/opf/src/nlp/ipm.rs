//! Primal-dual interior-point method for smooth NLPs.
//!
//! Solves `min f(x) + modifier  s.t. c_E(x) = 0, h(x) ≤ 0, lb ≤ x ≤ ub` by
//! Newton steps on the perturbed KKT system with slacks on all inequalities
//! (finite bounds become inequality rows with unit Jacobians; fixed
//! variables become equality rows):
//!
//! ```txt
//!   ∇f + J_Eᵀν + J_hᵀκ = 0,   c_E = 0,   h + s = 0,   S·κ = μ·e,  s, κ > 0.
//! ```
//!
//! Eliminating (Δs, Δκ) gives the reduced symmetric system
//!
//! ```txt
//!   [ W + δ_x·I   J_Eᵀ    ] [Δx]   [ rhs_x ]        W = ∇²L + J_hᵀ·diag(κ/s)·J_h
//!   [ J_E        −δ_c·I   ] [Δν] = [ −c_E  ]
//! ```
//!
//! factored by sparse LDLᵀ with AMD ordering. The inertia must be
//! (n, m, 0); otherwise δ_x escalates from 1e-8 by factors of 10 (δ_c is
//! switched to 1e-8 alongside) until the factorization is quasi-definite.
//! Steps use the fraction-to-the-boundary rule plus a residual-decrease
//! backtracking safeguard; the barrier parameter decreases monotonically
//! once the inner KKT error reaches `10·μ`. All symbolic work (patterns,
//! ordering, elimination tree) happens once in [`Ipm::new`] so the
//! distributed algorithms can re-solve the same problem shape thousands of
//! times cheaply.

use super::sparse::{LdlSymbolic, Pattern};
use super::{Nlp, QuadraticModifier};

/// Solver parameters. Defaults: tolerance 1e-8, 200 iterations, initial
/// barrier 0.1 with reduction factor 0.2, activity tolerance 1e-6.
#[derive(Debug, Clone)]
pub struct IpmSettings {
    /// Scaled KKT error below which the problem counts as solved.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial barrier parameter μ₀ (cold starts).
    pub mu0: f64,
    /// Linear barrier reduction factor (the update also applies μ^1.5).
    pub mu_reduction: f64,
    /// Activity tolerance consumed by active-set extraction downstream.
    pub tau_act: f64,
    /// Fraction-to-the-boundary coefficient.
    pub ftb: f64,
    /// Minimum initial slack distance.
    pub slack_min: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        IpmSettings {
            tol: 1e-8,
            max_iter: 200,
            mu0: 0.1,
            mu_reduction: 0.2,
            tau_act: 1e-6,
            ftb: 0.99995,
            slack_min: 1e-4,
        }
    }
}

/// Outcome classification of one solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Scaled KKT error reached the tolerance.
    Solved,
    /// Iteration cap hit while primal-feasible to 1e-4.
    MaxIter,
    /// Iteration cap hit with substantial primal infeasibility remaining.
    InfeasibleDetected,
    /// The KKT system stayed singular/indefinite through the maximum
    /// regularization, or iterates became non-finite.
    NumericalFailure,
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, Copy)]
pub struct IterLog {
    pub mu: f64,
    /// Scaled KKT error E_0 at the iterate.
    pub kkt_error: f64,
    /// Raw objective f(x) without modifier terms.
    pub objective: f64,
}

/// Primal-dual result with multipliers split by constraint class.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Raw objective f(x) without modifier terms.
    pub objective: f64,
    pub iterations: usize,
    /// Final scaled KKT error.
    pub kkt_error: f64,
    /// Multipliers of the explicit equality rows.
    pub nu: Vec<f64>,
    /// Multipliers of the fixed-variable rows (aligned with `Nlp::fixed_vars`).
    pub fixed_nu: Vec<f64>,
    /// Multipliers of the explicit inequality rows (≥ 0).
    pub kappa: Vec<f64>,
    /// Dense lower/upper bound multipliers (0 where no finite bound).
    pub gamma_lo: Vec<f64>,
    pub gamma_up: Vec<f64>,
    /// Full internal vectors in solver row order, for warm restarts.
    pub slack: Vec<f64>,
    pub kappa_all: Vec<f64>,
    pub nu_all: Vec<f64>,
    pub iter_log: Vec<IterLog>,
}

/// Inequality-row classification in solver order: user rows first, then
/// bound rows interleaved per variable (upper before lower).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowKind {
    User(usize),
    Upper(usize),
    Lower(usize),
}

/// Reusable solver bound to one problem *shape*: holds index maps, sparsity
/// patterns and the symbolic factorization. The same `Ipm` may solve the
/// problem repeatedly under different modifiers and warm starts.
pub struct Ipm {
    n: usize,
    n_user_eq: usize,
    n_user_ineq: usize,
    /// Fixed variables (lb == ub) appended as equality rows.
    fixed: Vec<usize>,
    /// All inequality rows in solver order.
    rows: Vec<RowKind>,
    /// Sorted support per user inequality row.
    ineq_support: Vec<Vec<usize>>,
    /// m × n equality Jacobian pattern.
    je: Pattern,
    /// p × n inequality Jacobian pattern.
    jh: Pattern,
    /// Upper triangle of the (n+m) × (n+m) reduced KKT matrix.
    kkt: Pattern,
    ldl: LdlSymbolic,
}

/// Total equality rows (user + fixed).
fn eq_rows(nlp: &Nlp, fixed: &[usize]) -> usize {
    nlp.eq.len() + fixed.len()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &a| m.max(a.abs()))
}

/// Everything evaluated at one primal point.
struct Point {
    f_raw: f64,
    /// ∇f plus modifier gradient.
    grad: Vec<f64>,
    /// Equality residuals (user rows then fixed rows).
    ceq: Vec<f64>,
    /// Inequality values in solver row order.
    h: Vec<f64>,
    je_vals: Vec<f64>,
    jh_vals: Vec<f64>,
}

impl Ipm {
    pub fn new(nlp: &Nlp) -> Self {
        nlp.assert_consistent();
        let n = nlp.n;
        let fixed = nlp.fixed_vars();

        let mut rows = Vec::new();
        for r in 0..nlp.ineq.len() {
            rows.push(RowKind::User(r));
        }
        for i in 0..n {
            if nlp.lb[i] == nlp.ub[i] {
                continue;
            }
            if nlp.ub[i].is_finite() {
                rows.push(RowKind::Upper(i));
            }
            if nlp.lb[i].is_finite() {
                rows.push(RowKind::Lower(i));
            }
        }

        let ineq_support: Vec<Vec<usize>> = nlp.ineq.iter().map(|h| h.support()).collect();

        let m = eq_rows(nlp, &fixed);
        let p = rows.len();

        let mut je_trips = Vec::new();
        Self::enumerate_je(nlp, &fixed, &nlp.x0, &mut |r, c, _| je_trips.push((r, c)));
        let je = Pattern::from_triplets(m, n, &je_trips);

        let mut jh_trips = Vec::new();
        Self::enumerate_jh(nlp, &rows, &nlp.x0, &mut |r, c, _| jh_trips.push((r, c)));
        let jh = Pattern::from_triplets(p, n, &jh_trips);

        let mut ipm = Ipm {
            n,
            n_user_eq: nlp.eq.len(),
            n_user_ineq: nlp.ineq.len(),
            fixed,
            rows,
            ineq_support,
            je,
            jh,
            kkt: Pattern::from_triplets(1, 1, &[(0, 0)]), // replaced below
            ldl: LdlSymbolic::new(&Pattern::from_triplets(1, 1, &[(0, 0)])),
        };

        let mut kkt_trips = Vec::new();
        ipm.enumerate_kkt(
            nlp,
            &nlp.x0,
            &vec![1.0; m],
            &vec![1.0; p],
            &vec![1.0; p],
            &vec![1.0; n],
            1.0,
            &mut |i, j, _| kkt_trips.push((i, j)),
        );
        ipm.kkt = Pattern::from_triplets(n + m, n + m, &kkt_trips);
        ipm.ldl = LdlSymbolic::new(&ipm.kkt);
        ipm
    }

    /// Inequality rows in solver order (user rows, then bound rows).
    pub fn row_kinds(&self) -> &[RowKind] {
        &self.rows
    }

    fn enumerate_je(
        nlp: &Nlp,
        fixed: &[usize],
        x: &[f64],
        f: &mut impl FnMut(usize, usize, f64),
    ) {
        for (r, e) in nlp.eq.iter().enumerate() {
            e.grad_entries(x, 1.0, &mut |i, v| f(r, i, v));
        }
        for (k, &i) in fixed.iter().enumerate() {
            f(nlp.eq.len() + k, i, 1.0);
        }
    }

    fn enumerate_jh(
        nlp: &Nlp,
        rows: &[RowKind],
        x: &[f64],
        f: &mut impl FnMut(usize, usize, f64),
    ) {
        for (r, kind) in rows.iter().enumerate() {
            match *kind {
                RowKind::User(k) => nlp.ineq[k].grad_entries(x, 1.0, &mut |i, v| f(r, i, v)),
                RowKind::Upper(i) => f(r, i, 1.0),
                RowKind::Lower(i) => f(r, i, -1.0),
            }
        }
    }

    /// Emit the upper triangle of the reduced KKT matrix. The emission
    /// order/count is value-independent, so the same enumeration builds the
    /// pattern and refills the numbers every Newton step.
    ///
    /// `w_eq`/`w_ineq` weight the constraint Hessians (multipliers),
    /// `dks[r] = κ_r/s_r`, `diag_x[i]` is the x-block diagonal addition
    /// (modifier proximal weight + δ_x), `diag_c` the dual regularization.
    #[allow(clippy::too_many_arguments)]
    fn enumerate_kkt(
        &self,
        nlp: &Nlp,
        x: &[f64],
        w_eq: &[f64],
        w_ineq: &[f64],
        dks: &[f64],
        diag_x: &[f64],
        diag_c: f64,
        f: &mut impl FnMut(usize, usize, f64),
    ) {
        // ∇²f and constraint curvature (canonical-upper entries).
        nlp.objective.hessian_entries(x, 1.0, f);
        for (r, e) in nlp.eq.iter().enumerate() {
            e.hessian_entries(x, w_eq[r], f);
        }
        for (r, h) in nlp.ineq.iter().enumerate() {
            h.hessian_entries(x, w_ineq[r], f);
        }
        // J_hᵀ·diag(κ/s)·J_h: dense per-row outer products for user rows,
        // plain diagonal entries for bound rows.
        let mut local = Vec::new();
        for (r, kind) in self.rows.iter().enumerate() {
            match *kind {
                RowKind::User(k) => {
                    let support = &self.ineq_support[k];
                    local.clear();
                    local.resize(support.len(), 0.0);
                    nlp.ineq[k].grad_entries(x, 1.0, &mut |i, v| {
                        let t = support.binary_search(&i).expect("support covers gradient");
                        local[t] += v;
                    });
                    for a in 0..support.len() {
                        for b in a..support.len() {
                            f(support[a], support[b], dks[r] * local[a] * local[b]);
                        }
                    }
                }
                RowKind::Upper(i) | RowKind::Lower(i) => f(i, i, dks[r]),
            }
        }
        // Primal regularization diagonal (unconditional slots).
        for i in 0..self.n {
            f(i, i, diag_x[i]);
        }
        // Equality Jacobian block at (col i, row n + r) — always upper.
        Self::enumerate_je(nlp, &self.fixed, x, &mut |r, i, v| f(i, self.n + r, v));
        // Dual regularization block.
        let m = eq_rows(nlp, &self.fixed);
        for r in 0..m {
            f(self.n + r, self.n + r, -diag_c);
        }
    }

    fn eval_point(&self, nlp: &Nlp, modif: &QuadraticModifier, x: &[f64]) -> Point {
        let f_raw = nlp.objective.value(x);
        let mut grad = vec![0.0; self.n];
        nlp.objective.add_gradient(x, 1.0, &mut grad);
        modif.add_gradient(x, &mut grad);

        let mut ceq = nlp.eq_values(x);
        for &i in &self.fixed {
            ceq.push(x[i] - nlp.lb[i]);
        }

        let mut h = Vec::with_capacity(self.rows.len());
        for kind in &self.rows {
            h.push(match *kind {
                RowKind::User(k) => nlp.ineq[k].value(x),
                RowKind::Upper(i) => x[i] - nlp.ub[i],
                RowKind::Lower(i) => nlp.lb[i] - x[i],
            });
        }

        let mut je_tv = Vec::with_capacity(self.je.nnz());
        Self::enumerate_je(nlp, &self.fixed, x, &mut |_, _, v| je_tv.push(v));
        let mut je_vals = Vec::new();
        self.je.fill(&je_tv, &mut je_vals);

        let mut jh_tv = Vec::with_capacity(self.jh.nnz());
        Self::enumerate_jh(nlp, &self.rows, x, &mut |_, _, v| jh_tv.push(v));
        let mut jh_vals = Vec::new();
        self.jh.fill(&jh_tv, &mut jh_vals);

        Point {
            f_raw,
            grad,
            ceq,
            h,
            je_vals,
            jh_vals,
        }
    }

    /// Dual residual ∇f + J_Eᵀν + J_hᵀκ.
    fn dual_residual(&self, pt: &Point, nu: &[f64], kappa: &[f64]) -> Vec<f64> {
        let mut r = pt.grad.clone();
        self.je.mul_transpose_add(&pt.je_vals, nu, 1.0, &mut r);
        self.jh.mul_transpose_add(&pt.jh_vals, kappa, 1.0, &mut r);
        r
    }

    /// IPOPT-style scaled KKT error at barrier μ (μ = 0 gives the
    /// termination measure).
    fn kkt_err(&self, pt: &Point, s: &[f64], nu: &[f64], kappa: &[f64], mu: f64) -> f64 {
        let m = nu.len();
        let p = kappa.len();
        let r_dual = self.dual_residual(pt, nu, kappa);
        let mult_l1: f64 =
            nu.iter().map(|v| v.abs()).sum::<f64>() + kappa.iter().map(|v| v.abs()).sum::<f64>();
        let s_d = if m + p > 0 {
            (mult_l1 / (m + p) as f64).max(100.0) / 100.0
        } else {
            1.0
        };
        let s_c = if p > 0 {
            (kappa.iter().map(|v| v.abs()).sum::<f64>() / p as f64).max(100.0) / 100.0
        } else {
            1.0
        };

        let mut e = inf_norm(&r_dual) / s_d;
        e = e.max(inf_norm(&pt.ceq));
        let mut r_pr = 0.0f64;
        let mut r_cm = 0.0f64;
        for r in 0..p {
            r_pr = r_pr.max((pt.h[r] + s[r]).abs());
            r_cm = r_cm.max((s[r] * kappa[r] - mu).abs());
        }
        e.max(r_pr).max(r_cm / s_c)
    }

    /// Solve the NLP. `modif` adds linear/proximal objective terms; `warm`
    /// reuses a previous solution of the *same* problem shape.
    pub fn solve(
        &self,
        nlp: &Nlp,
        modif: &QuadraticModifier,
        warm: Option<&Solution>,
        settings: &IpmSettings,
    ) -> Solution {
        let n = self.n;
        let m = eq_rows(nlp, &self.fixed);
        let p = self.rows.len();
        let tol = settings.tol;
        let mu_floor = tol / 10.0;

        // --- Initialization -------------------------------------------------
        let mut x = match warm {
            Some(w) => w.x.clone(),
            None => nlp.x0.clone(),
        };
        for (k, &i) in self.fixed.iter().enumerate() {
            let _ = k;
            x[i] = nlp.lb[i];
        }
        let mut pt = self.eval_point(nlp, modif, &x);

        let mut s = vec![0.0; p];
        let mut kappa = vec![0.0; p];
        let mut nu = vec![0.0; m];
        match warm {
            // Push slacks and multipliers away from zero when restarting:
            // re-entering hard against the previous active set jams the
            // first steps whenever the modifier has moved the solution.
            Some(w) if w.slack.len() == p && w.nu_all.len() == m => {
                for r in 0..p {
                    s[r] = w.slack[r].max(1e-6);
                    kappa[r] = w.kappa_all[r].max(1e-6);
                }
                nu.copy_from_slice(&w.nu_all);
            }
            _ => {
                for r in 0..p {
                    s[r] = (-pt.h[r]).max(settings.slack_min);
                    kappa[r] = settings.mu0 / s[r];
                }
            }
        }
        let mut mu = if p == 0 {
            0.0
        } else if warm.is_some() {
            let avg = s.iter().zip(&kappa).map(|(a, b)| a * b).sum::<f64>() / p as f64;
            avg.clamp(mu_floor.max(1e-6), settings.mu0)
        } else {
            settings.mu0
        };

        let mut iter_log = Vec::new();
        let mut status = SolveStatus::MaxIter;
        let mut iterations = 0;
        let mut ldl_num = self.ldl.numeric();
        let mut kkt_trip_vals: Vec<f64> = Vec::new();
        let mut kkt_vals: Vec<f64> = Vec::new();

        let mut best_e0 = f64::INFINITY;
        for iter in 0..settings.max_iter {
            iterations = iter;
            let e0 = self.kkt_err(&pt, &s, &nu, &kappa, 0.0);
            iter_log.push(IterLog {
                mu,
                kkt_error: e0,
                objective: pt.f_raw,
            });
            if e0 <= tol {
                status = SolveStatus::Solved;
                break;
            }
            best_e0 = best_e0.min(e0);
            if iter > 10 && e0 > 1e8 * (1.0 + best_e0) {
                status = SolveStatus::NumericalFailure;
                break;
            }
            // Monotone barrier decrease once the inner problem is solved
            // to 10·μ accuracy.
            if p > 0 {
                let mut e_mu = self.kkt_err(&pt, &s, &nu, &kappa, mu);
                while mu > mu_floor && e_mu <= 10.0 * mu {
                    mu = (settings.mu_reduction * mu).min(mu.powf(1.5)).max(mu_floor);
                    e_mu = self.kkt_err(&pt, &s, &nu, &kappa, mu);
                }
            }

            // --- Assemble and factor the reduced KKT system -----------------
            let mut dks = vec![0.0; p];
            for r in 0..p {
                dks[r] = kappa[r] / s[r];
            }
            let mut delta_x = 0.0f64;
            let mut delta_c = 0.0f64;
            let mut factored = false;
            let mut diag = vec![0.0; n];
            loop {
                for i in 0..n {
                    diag[i] = delta_x
                        + modif.prox_weight.get(i).copied().unwrap_or(0.0);
                }
                kkt_trip_vals.clear();
                self.enumerate_kkt(nlp, &x, &nu, &kappa, &dks, &diag, delta_c, &mut |_,
                    _,
                    v| {
                    kkt_trip_vals.push(v)
                });
                self.kkt.fill(&kkt_trip_vals, &mut kkt_vals);
                match self.ldl.refactor(&kkt_vals, &mut ldl_num) {
                    Ok(inertia) if inertia.positive == n && inertia.negative == m => {
                        factored = true;
                        break;
                    }
                    _ => {
                        delta_c = 1e-8;
                        delta_x = if delta_x == 0.0 { 1e-8 } else { delta_x * 10.0 };
                        if delta_x > 1e12 {
                            break;
                        }
                    }
                }
            }
            if !factored {
                status = SolveStatus::NumericalFailure;
                break;
            }

            // --- Newton direction -------------------------------------------
            // rhs_x = −r_dual + J_hᵀ[(r_comp − κ∘r_pr)/s], rhs_ν = −c_E.
            let r_dual = self.dual_residual(&pt, &nu, &kappa);
            let mut corr = vec![0.0; p];
            for r in 0..p {
                let r_pr = pt.h[r] + s[r];
                let r_comp = s[r] * kappa[r] - mu;
                corr[r] = (r_comp - kappa[r] * r_pr) / s[r];
            }
            let mut rhs = vec![0.0; n + m];
            for i in 0..n {
                rhs[i] = -r_dual[i];
            }
            self.jh.mul_transpose_add(&pt.jh_vals, &corr, 1.0, &mut rhs[0..n]);
            for r in 0..m {
                rhs[n + r] = -pt.ceq[r];
            }
            self.ldl.solve(&mut ldl_num, &mut rhs);
            let (dx, dnu) = rhs.split_at(n);

            let mut jh_dx = vec![0.0; p];
            self.jh.mul_add(&pt.jh_vals, dx, 1.0, &mut jh_dx);
            let mut ds = vec![0.0; p];
            let mut dkappa = vec![0.0; p];
            for r in 0..p {
                let r_pr = pt.h[r] + s[r];
                let r_comp = s[r] * kappa[r] - mu;
                ds[r] = -r_pr - jh_dx[r];
                dkappa[r] = (-r_comp + kappa[r] * (r_pr + jh_dx[r])) / s[r];
            }

            // --- Fraction to the boundary + backtracking safeguard ----------
            let mut alpha_p = 1.0f64;
            let mut alpha_d = 1.0f64;
            for r in 0..p {
                if ds[r] < 0.0 {
                    alpha_p = alpha_p.min(settings.ftb * s[r] / -ds[r]);
                }
                if dkappa[r] < 0.0 {
                    alpha_d = alpha_d.min(settings.ftb * kappa[r] / -dkappa[r]);
                }
            }

            // Accept the full safeguarded Newton step (the inertia-corrected
            // direction plus fraction-to-the-boundary is the classic OPF
            // interior-point recipe); halve only while the trial point
            // evaluates to non-finite values.
            let mut accepted = false;
            let mut t = 1.0f64;
            for _ in 0..20 {
                let xt: Vec<f64> = (0..n).map(|i| x[i] + t * alpha_p * dx[i]).collect();
                let pt_t = self.eval_point(nlp, modif, &xt);
                let finite = pt_t.f_raw.is_finite()
                    && pt_t.grad.iter().all(|v| v.is_finite())
                    && pt_t.ceq.iter().all(|v| v.is_finite())
                    && pt_t.h.iter().all(|v| v.is_finite());
                if finite {
                    x = xt;
                    pt = pt_t;
                    for r in 0..p {
                        s[r] += t * alpha_p * ds[r];
                        kappa[r] += t * alpha_d * dkappa[r];
                    }
                    for r in 0..m {
                        nu[r] += t * alpha_d * dnu[r];
                    }
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                status = SolveStatus::NumericalFailure;
                break;
            }
            iterations = iter + 1;
        }

        let e0_final = self.kkt_err(&pt, &s, &nu, &kappa, 0.0);
        if status == SolveStatus::Solved || e0_final <= tol {
            status = SolveStatus::Solved;
        } else if status == SolveStatus::MaxIter {
            let primal = inf_norm(&pt.ceq)
                .max(pt.h.iter().zip(&s).fold(0.0f64, |a, (h, s)| a.max((h + s).abs())));
            if primal > 1e-4 {
                status = SolveStatus::InfeasibleDetected;
            }
        }

        // --- Split multipliers by constraint class --------------------------
        let mut gamma_lo = vec![0.0; n];
        let mut gamma_up = vec![0.0; n];
        let mut kappa_user = vec![0.0; self.n_user_ineq];
        for (r, kind) in self.rows.iter().enumerate() {
            match *kind {
                RowKind::User(k) => kappa_user[k] = kappa[r],
                RowKind::Upper(i) => gamma_up[i] = kappa[r],
                RowKind::Lower(i) => gamma_lo[i] = kappa[r],
            }
        }

        Solution {
            status,
            objective: pt.f_raw,
            iterations,
            kkt_error: e0_final,
            nu: nu[0..self.n_user_eq].to_vec(),
            fixed_nu: nu[self.n_user_eq..].to_vec(),
            kappa: kappa_user,
            gamma_lo,
            gamma_up,
            slack: s,
            kappa_all: kappa,
            nu_all: nu,
            x,
            iter_log,
        }
    }

}
