//! Coupled consensus QP solved through per-region bordered KKT blocks and a
//! Schur complement on the consensus multipliers.
//!
//! The QP couples the regions only through the consensus rows:
//!
//! ```txt
//!   min  Σ_ℓ ( ½ Δx_ℓᵀH_ℓΔx_ℓ + g_ℓᵀΔx_ℓ ) + λᵀs + (μ/2)‖s‖²
//!   s.t. Σ_ℓ A_ℓ (x_ℓ + Δx_ℓ) = s      | λ_qp
//!        J_ℓ Δx_ℓ = 0  per region      | κ_qp
//! ```
//!
//! Its KKT system is block-bordered: one block `K_ℓ = [[H_ℓ, J_ℓᵀ],[J_ℓ, 0]]`
//! per region plus the small coupling rows. Eliminating the blocks leaves a
//! q×q system for `λ_qp` (q = number of consensus rows),
//!
//! ```txt
//!   (μ⁻¹I + Σ_ℓ Ā_ℓᵀ K_ℓ⁻¹ Ā_ℓ) λ_qp = μ⁻¹λ + Σ_ℓ (A_ℓ x_ℓ − Ā_ℓᵀ K_ℓ⁻¹ [g_ℓ; 0])
//! ```
//!
//! with `Ā_ℓ = [A_ℓᵀ; 0]`, after which each region recovers its own step by
//! back-substitution `[Δx_ℓ; κ_ℓ] = −K_ℓ⁻¹([g_ℓ; 0] + Ā_ℓ λ_qp)` and the
//! shared slack is `s = (λ_qp − λ)/μ`. A dense factorization of the full
//! KKT matrix ([`solve_dense_kkt`]) serves as the test oracle.

use nalgebra::{DMatrix, DVector};

/// Per-region inputs to the coupled QP, in dense form. `a_t` is the
/// transpose of the region's consensus rows (n×q) and `ax` its consensus
/// contribution `A_ℓ x_ℓ` at the current local solution.
#[derive(Debug, Clone)]
pub struct QpRegion {
    pub h: DMatrix<f64>,
    pub j: DMatrix<f64>,
    pub g: DVector<f64>,
    pub a_t: DMatrix<f64>,
    pub ax: DVector<f64>,
}

impl QpRegion {
    fn check(&self, l: usize, q: usize) {
        let n = self.h.nrows();
        assert_eq!(self.h.ncols(), n, "region {l}: H not square");
        assert_eq!(self.j.ncols(), n, "region {l}: J column count");
        assert_eq!(self.g.len(), n, "region {l}: g length");
        assert_eq!(self.a_t.nrows(), n, "region {l}: a_t row count");
        assert_eq!(self.a_t.ncols(), q, "region {l}: a_t column count");
        assert_eq!(self.ax.len(), q, "region {l}: ax length");
    }
}

/// Solution of the coupled QP with its own residual check.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub dx: Vec<DVector<f64>>,
    pub kappa_qp: Vec<DVector<f64>>,
    pub lambda_qp: DVector<f64>,
    pub s: DVector<f64>,
    /// ∞-norm residual of the full KKT system evaluated at the returned
    /// solution; rounding-level for a healthy solve.
    pub kkt_residual: f64,
}

/// Residual of the four KKT block rows at a candidate solution. Shared by
/// the Schur path, the dense oracle and the tests.
fn kkt_residual(
    regions: &[QpRegion],
    lambda: &DVector<f64>,
    mu: f64,
    sol: &QpSolution,
) -> f64 {
    let q = lambda.len();
    let mut worst = 0.0f64;
    // Row 3 accumulates over regions: Σ A_ℓ(x_ℓ + Δx_ℓ) − s.
    let mut r3 = -sol.s.clone();
    for (l, r) in regions.iter().enumerate() {
        let r1 = &r.h * &sol.dx[l] + &r.a_t * &sol.lambda_qp + r.j.transpose() * &sol.kappa_qp[l]
            + &r.g;
        worst = worst.max(r1.amax());
        let r4 = &r.j * &sol.dx[l];
        if r4.len() > 0 {
            worst = worst.max(r4.amax());
        }
        r3 += &r.ax + r.a_t.transpose() * &sol.dx[l];
    }
    if q > 0 {
        let r2 = mu * &sol.s - &sol.lambda_qp + lambda;
        worst = worst.max(r2.amax()).max(r3.amax());
    }
    worst
}

/// Factor one region's bordered block `[[H, Jᵀ],[J, 0]]`, retrying once with
/// a tiny negative regularization of the constraint block if the factor is
/// singular (e.g. a momentarily rank-deficient active set).
fn factor_block(
    l: usize,
    r: &QpRegion,
) -> Result<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>, String> {
    let n = r.h.nrows();
    let a = r.j.nrows();
    let m = n + a;
    let mut k = DMatrix::zeros(m, m);
    k.view_mut((0, 0), (n, n)).copy_from(&r.h);
    if a > 0 {
        k.view_mut((n, 0), (a, n)).copy_from(&r.j);
        k.view_mut((0, n), (n, a)).copy_from(&r.j.transpose());
    }
    let lu = k.clone().lu();
    if lu.is_invertible() {
        return Ok(lu);
    }
    for i in n..m {
        k[(i, i)] = -1e-10;
    }
    let lu = k.lu();
    if lu.is_invertible() {
        Ok(lu)
    } else {
        Err(format!("region {l}: bordered KKT block is singular"))
    }
}

/// Solve the coupled QP through the per-region Schur elimination.
pub fn solve_coupled_qp(
    regions: &[QpRegion],
    lambda: &DVector<f64>,
    mu: f64,
) -> Result<QpSolution, String> {
    let q = lambda.len();
    for (l, r) in regions.iter().enumerate() {
        r.check(l, q);
    }

    // Per-region solves against the two right-hand sides the elimination
    // needs: p = K⁻¹[g; 0] and Q = K⁻¹[Aᵀ; 0].
    let mut ps: Vec<DVector<f64>> = Vec::with_capacity(regions.len());
    let mut qs: Vec<DMatrix<f64>> = Vec::with_capacity(regions.len());
    let mut lus = Vec::with_capacity(regions.len());
    let mut schur = DMatrix::identity(q, q) / mu;
    let mut rhs = lambda / mu;
    for (l, r) in regions.iter().enumerate() {
        let n = r.h.nrows();
        let m = n + r.j.nrows();
        let lu = factor_block(l, r)?;
        let mut gext = DVector::zeros(m);
        gext.rows_mut(0, n).copy_from(&r.g);
        let p = lu
            .solve(&gext)
            .ok_or_else(|| format!("region {l}: block solve failed"))?;
        let mut aext = DMatrix::zeros(m, q);
        aext.view_mut((0, 0), (n, q)).copy_from(&r.a_t);
        let qsol = lu
            .solve(&aext)
            .ok_or_else(|| format!("region {l}: block solve failed"))?;
        schur += r.a_t.transpose() * qsol.view((0, 0), (n, q));
        rhs += &r.ax - r.a_t.transpose() * p.rows(0, n);
        ps.push(p);
        qs.push(qsol);
        lus.push(lu);
    }

    // The Schur complement is symmetric positive definite (the x-block of
    // each K⁻¹ is a positive semidefinite projection when H is positive
    // definite and J has full row rank); Cholesky with an LU fallback for
    // borderline conditioning.
    let lambda_qp = match nalgebra::Cholesky::new(schur.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => schur
            .lu()
            .solve(&rhs)
            .ok_or_else(|| "coupling system is singular".to_string())?,
    };

    let s = (&lambda_qp - lambda) / mu;
    let mut dx = Vec::with_capacity(regions.len());
    let mut kappa_qp = Vec::with_capacity(regions.len());
    for (l, r) in regions.iter().enumerate() {
        let n = r.h.nrows();
        let a = r.j.nrows();
        let full = -&ps[l] - &qs[l] * &lambda_qp;
        dx.push(DVector::from(full.rows(0, n).clone_owned()));
        kappa_qp.push(DVector::from(full.rows(n, a).clone_owned()));
    }

    let mut sol = QpSolution {
        dx,
        kappa_qp,
        lambda_qp,
        s,
        kkt_residual: 0.0,
    };
    sol.kkt_residual = kkt_residual(regions, lambda, mu, &sol);
    Ok(sol)
}

/// Oracle: assemble the full KKT matrix of the coupled QP and solve it with
/// one dense factorization. Unknown order: all Δx_ℓ, then s, then λ_qp,
/// then all κ_ℓ.
pub fn solve_dense_kkt(
    regions: &[QpRegion],
    lambda: &DVector<f64>,
    mu: f64,
) -> Result<QpSolution, String> {
    let q = lambda.len();
    for (l, r) in regions.iter().enumerate() {
        r.check(l, q);
    }
    let ns: Vec<usize> = regions.iter().map(|r| r.h.nrows()).collect();
    let as_: Vec<usize> = regions.iter().map(|r| r.j.nrows()).collect();
    let n_tot: usize = ns.iter().sum();
    let a_tot: usize = as_.iter().sum();
    let dim = n_tot + 2 * q + a_tot;

    let mut k = DMatrix::zeros(dim, dim);
    let mut b = DVector::zeros(dim);
    let s_off = n_tot;
    let l_off = n_tot + q;
    let k_off = n_tot + 2 * q;

    let mut xo = 0;
    let mut ko = 0;
    for (l, r) in regions.iter().enumerate() {
        let n = ns[l];
        let a = as_[l];
        k.view_mut((xo, xo), (n, n)).copy_from(&r.h);
        k.view_mut((xo, l_off), (n, q)).copy_from(&r.a_t);
        k.view_mut((l_off, xo), (q, n)).copy_from(&r.a_t.transpose());
        if a > 0 {
            k.view_mut((xo, k_off + ko), (n, a)).copy_from(&r.j.transpose());
            k.view_mut((k_off + ko, xo), (a, n)).copy_from(&r.j);
        }
        for i in 0..n {
            b[xo + i] = -r.g[i];
        }
        for i in 0..q {
            b[l_off + i] -= r.ax[i];
        }
        xo += n;
        ko += a;
    }
    for i in 0..q {
        k[(s_off + i, s_off + i)] = mu;
        k[(s_off + i, l_off + i)] = -1.0;
        k[(l_off + i, s_off + i)] = -1.0;
        b[s_off + i] = -lambda[i];
    }

    let sol = k
        .lu()
        .solve(&b)
        .ok_or_else(|| "dense KKT matrix is singular".to_string())?;

    let mut dx = Vec::with_capacity(regions.len());
    let mut kappa_qp = Vec::with_capacity(regions.len());
    let mut xo = 0;
    let mut ko = 0;
    for l in 0..regions.len() {
        dx.push(DVector::from(sol.rows(xo, ns[l]).clone_owned()));
        kappa_qp.push(DVector::from(sol.rows(k_off + ko, as_[l]).clone_owned()));
        xo += ns[l];
        ko += as_[l];
    }
    let mut out = QpSolution {
        dx,
        kappa_qp,
        lambda_qp: DVector::from(sol.rows(l_off, q).clone_owned()),
        s: DVector::from(sol.rows(s_off, q).clone_owned()),
        kkt_residual: 0.0,
    };
    out.kkt_residual = kkt_residual(regions, lambda, mu, &out);
    Ok(out)
}

/// Largest deviation between two solutions over (Δx, s, λ_qp) — the
/// quantities the algorithm consumes (κ_qp is not compared: it is only
/// unique when every active Jacobian has full row rank).
pub fn solution_deviation(a: &QpSolution, b: &QpSolution) -> f64 {
    let mut d = (&a.lambda_qp - &b.lambda_qp).amax().max((&a.s - &b.s).amax());
    for (da, db) in a.dx.iter().zip(&b.dx) {
        d = d.max((da - db).amax());
    }
    d
}
