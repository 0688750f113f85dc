//! Scalar expressions with exact sparse first and second derivatives.
//!
//! Every objective and constraint row in the OPF formulation is a sum of
//! four primitive term families, each with hand-derived derivatives:
//!
//! * linear terms `c·x_i`,
//! * bilinear terms `c·x_i·x_j` (DC flows, loss polynomials, squares),
//! * trigonometric branch-flow terms `V_i·V_j·(a·cos θ_ij + b·sin θ_ij)`
//!   with `θ_ij = θ_i − θ_j`,
//! * quartic terms `c·x_i²·x_j²` (the converter current-defining equality).
//!
//! Apparent-power limits, which are sums of squares of two expression
//! values, are represented by [`Ineq::SumSquares`].
//!
//! Derivative entries are *emitted* through callbacks rather than collected:
//! the KKT assembler registers the emission sequence once to build a sparse
//! pattern and then refills values every Newton iteration. For that to work
//! the emission order and count must not depend on `x`; all emitters below
//! are value-independent in structure. Hessian entries are canonical-upper:
//! an entry `(i, j, v)` with `i < j` stands for `v` at both `(i, j)` and
//! `(j, i)`, and the emitters fold aliased index pairs (the same variable
//! appearing in both slots of a cross derivative) onto the diagonal with the
//! required factor of two.

/// Trigonometric branch-flow term `V_i·V_j·(a·cos(θ_i−θ_j) + b·sin(θ_i−θ_j))`.
///
/// The four indices address the voltage magnitudes and angles of the two
/// terminals. Index aliasing (`vi == vj`, `thi == thj`) is allowed and is
/// how constant-angle self terms like `a·V_i²` are expressed.
#[derive(Debug, Clone, Copy)]
pub struct PairTerm {
    pub vi: usize,
    pub thi: usize,
    pub vj: usize,
    pub thj: usize,
    pub a: f64,
    pub b: f64,
}

/// A scalar expression: constant + linear + bilinear + trig + quartic terms.
#[derive(Debug, Clone, Default)]
pub struct Expr {
    pub constant: f64,
    /// `c * x_i` terms as `(i, c)`.
    pub lin: Vec<(usize, f64)>,
    /// `c * x_i * x_j` terms as `(i, j, c)`; `i == j` means `c * x_i²`.
    pub quad: Vec<(usize, usize, f64)>,
    pub pair: Vec<PairTerm>,
    /// `c * x_i² * x_j²` terms as `(i, j, c)`.
    pub sqsq: Vec<(usize, usize, f64)>,
}

/// Emit a cross second-derivative `∂²f/∂x_i∂x_j = v` in canonical-upper
/// form, folding aliased pairs onto the diagonal (where the two symmetric
/// contributions add).
#[inline]
fn emit_cross(f: &mut impl FnMut(usize, usize, f64), i: usize, j: usize, v: f64) {
    if i == j {
        f(i, i, 2.0 * v);
    } else if i < j {
        f(i, j, v);
    } else {
        f(j, i, v);
    }
}

impl Expr {
    pub fn new() -> Self {
        Expr::default()
    }

    pub fn add_const(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_lin(&mut self, i: usize, c: f64) -> &mut Self {
        self.lin.push((i, c));
        self
    }

    pub fn add_quad(&mut self, i: usize, j: usize, c: f64) -> &mut Self {
        self.quad.push((i, j, c));
        self
    }

    pub fn add_pair(&mut self, t: PairTerm) -> &mut Self {
        self.pair.push(t);
        self
    }

    pub fn add_sqsq(&mut self, i: usize, j: usize, c: f64) -> &mut Self {
        self.sqsq.push((i, j, c));
        self
    }

    /// Append `s` times another expression.
    pub fn add_scaled(&mut self, other: &Expr, s: f64) -> &mut Self {
        self.constant += s * other.constant;
        self.lin.extend(other.lin.iter().map(|&(i, c)| (i, s * c)));
        self.quad
            .extend(other.quad.iter().map(|&(i, j, c)| (i, j, s * c)));
        self.pair.extend(other.pair.iter().map(|t| PairTerm {
            a: s * t.a,
            b: s * t.b,
            ..*t
        }));
        self.sqsq
            .extend(other.sqsq.iter().map(|&(i, j, c)| (i, j, s * c)));
        self
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut v = self.constant;
        for &(i, c) in &self.lin {
            v += c * x[i];
        }
        for &(i, j, c) in &self.quad {
            v += c * x[i] * x[j];
        }
        for t in &self.pair {
            let th = x[t.thi] - x[t.thj];
            v += x[t.vi] * x[t.vj] * (t.a * th.cos() + t.b * th.sin());
        }
        for &(i, j, c) in &self.sqsq {
            v += c * x[i] * x[i] * x[j] * x[j];
        }
        v
    }

    /// Emit `w·∂f/∂x_i` as `(i, value)` pairs; indices may repeat and must
    /// be accumulated by the caller.
    pub fn grad_entries(&self, x: &[f64], w: f64, f: &mut impl FnMut(usize, f64)) {
        for &(i, c) in &self.lin {
            f(i, w * c);
        }
        for &(i, j, c) in &self.quad {
            f(i, w * c * x[j]);
            f(j, w * c * x[i]);
        }
        for t in &self.pair {
            let th = x[t.thi] - x[t.thj];
            let (s, c) = th.sin_cos();
            let tt = t.a * c + t.b * s;
            let u = -t.a * s + t.b * c;
            let (vi, vj) = (x[t.vi], x[t.vj]);
            f(t.vi, w * vj * tt);
            f(t.vj, w * vi * tt);
            f(t.thi, w * vi * vj * u);
            f(t.thj, -w * vi * vj * u);
        }
        for &(i, j, c) in &self.sqsq {
            f(i, w * 2.0 * c * x[i] * x[j] * x[j]);
            f(j, w * 2.0 * c * x[i] * x[i] * x[j]);
        }
    }

    /// Accumulate `w·∇f` into a dense gradient.
    pub fn add_gradient(&self, x: &[f64], w: f64, g: &mut [f64]) {
        self.grad_entries(x, w, &mut |i, v| g[i] += v);
    }

    /// Emit `w·∇²f` entries in canonical-upper form (see module docs).
    pub fn hessian_entries(&self, x: &[f64], w: f64, f: &mut impl FnMut(usize, usize, f64)) {
        for &(i, j, c) in &self.quad {
            emit_cross(f, i, j, w * c);
        }
        for t in &self.pair {
            let th = x[t.thi] - x[t.thj];
            let (s, c) = th.sin_cos();
            let tt = t.a * c + t.b * s;
            let u = -t.a * s + t.b * c;
            let (vi, vj) = (x[t.vi], x[t.vj]);
            let vvt = vi * vj * tt;
            emit_cross(f, t.vi, t.vj, w * tt);
            emit_cross(f, t.vi, t.thi, w * vj * u);
            emit_cross(f, t.vi, t.thj, -w * vj * u);
            emit_cross(f, t.vj, t.thi, w * vi * u);
            emit_cross(f, t.vj, t.thj, -w * vi * u);
            emit_cross(f, t.thi, t.thj, w * vvt);
            f(t.thi, t.thi, -w * vvt);
            f(t.thj, t.thj, -w * vvt);
        }
        for &(i, j, c) in &self.sqsq {
            f(i, i, w * 2.0 * c * x[j] * x[j]);
            f(j, j, w * 2.0 * c * x[i] * x[i]);
            emit_cross(f, i, j, w * 4.0 * c * x[i] * x[j]);
        }
    }

    /// Sorted, deduplicated variable indices the expression touches.
    pub fn support(&self) -> Vec<usize> {
        let mut s = Vec::new();
        for &(i, _) in &self.lin {
            s.push(i);
        }
        for &(i, j, _) in &self.quad {
            s.push(i);
            s.push(j);
        }
        for t in &self.pair {
            s.extend_from_slice(&[t.vi, t.thi, t.vj, t.thj]);
        }
        for &(i, j, _) in &self.sqsq {
            s.push(i);
            s.push(j);
        }
        s.sort_unstable();
        s.dedup();
        s
    }
}

/// One inequality row, `value(x) ≤ 0`.
#[derive(Debug, Clone)]
pub enum Ineq {
    /// A plain expression row.
    Expr(Expr),
    /// Apparent-power style limit `p(x)² + q(x)² − cap² ≤ 0`.
    SumSquares {
        p: Expr,
        q: Expr,
        cap2: f64,
        /// Precomputed supports, used to form the gradient outer products.
        p_support: Vec<usize>,
        q_support: Vec<usize>,
    },
}

impl Ineq {
    pub fn sum_squares(p: Expr, q: Expr, cap: f64) -> Self {
        let p_support = p.support();
        let q_support = q.support();
        Ineq::SumSquares {
            p,
            q,
            cap2: cap * cap,
            p_support,
            q_support,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Ineq::Expr(e) => e.value(x),
            Ineq::SumSquares { p, q, cap2, .. } => {
                let pv = p.value(x);
                let qv = q.value(x);
                pv * pv + qv * qv - cap2
            }
        }
    }

    /// Emit `w·∂h/∂x_i` entries (same accumulation contract as
    /// [`Expr::grad_entries`]).
    pub fn grad_entries(&self, x: &[f64], w: f64, f: &mut impl FnMut(usize, f64)) {
        match self {
            Ineq::Expr(e) => e.grad_entries(x, w, f),
            Ineq::SumSquares { p, q, .. } => {
                let pv = p.value(x);
                let qv = q.value(x);
                p.grad_entries(x, 2.0 * w * pv, f);
                q.grad_entries(x, 2.0 * w * qv, f);
            }
        }
    }

    pub fn add_gradient(&self, x: &[f64], w: f64, g: &mut [f64]) {
        self.grad_entries(x, w, &mut |i, v| g[i] += v);
    }

    /// Emit `w·∇²h` entries in canonical-upper form. For the sum-of-squares
    /// form `∇²h = 2∇p∇pᵀ + 2p∇²p + 2∇q∇qᵀ + 2q∇²q`; the outer products are
    /// emitted densely over each inner expression's support.
    pub fn hessian_entries(&self, x: &[f64], w: f64, f: &mut impl FnMut(usize, usize, f64)) {
        match self {
            Ineq::Expr(e) => e.hessian_entries(x, w, f),
            Ineq::SumSquares {
                p,
                q,
                p_support,
                q_support,
                ..
            } => {
                let pv = p.value(x);
                let qv = q.value(x);
                p.hessian_entries(x, 2.0 * w * pv, f);
                q.hessian_entries(x, 2.0 * w * qv, f);
                for (e, support) in [(p, p_support), (q, q_support)] {
                    let mut local = vec![0.0; support.len()];
                    e.grad_entries(x, 1.0, &mut |i, v| {
                        let k = support.binary_search(&i).expect("support covers gradient");
                        local[k] += v;
                    });
                    for a in 0..support.len() {
                        for b in a..support.len() {
                            // Support is sorted, so (a, b) is canonical-upper.
                            f(support[a], support[b], 2.0 * w * local[a] * local[b]);
                        }
                    }
                }
            }
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            Ineq::Expr(e) => e.support(),
            Ineq::SumSquares {
                p_support,
                q_support,
                ..
            } => {
                let mut s = p_support.clone();
                s.extend_from_slice(q_support);
                s.sort_unstable();
                s.dedup();
                s
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_expr(seed: u64, n: usize) -> Expr {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = Expr::new();
        e.add_const(rng.gen::<f64>() - 0.5);
        for _ in 0..3 {
            e.add_lin(rng.gen_range(0..n), 2.0 * rng.gen::<f64>() - 1.0);
            e.add_quad(
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                2.0 * rng.gen::<f64>() - 1.0,
            );
            e.add_pair(PairTerm {
                vi: rng.gen_range(0..n),
                thi: rng.gen_range(0..n),
                vj: rng.gen_range(0..n),
                thj: rng.gen_range(0..n),
                a: 2.0 * rng.gen::<f64>() - 1.0,
                b: 2.0 * rng.gen::<f64>() - 1.0,
            });
            e.add_sqsq(
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                2.0 * rng.gen::<f64>() - 1.0,
            );
        }
        e
    }

    fn random_point(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED);
        (0..n).map(|_| 0.5 + rng.gen::<f64>()).collect()
    }

    fn check_expr_derivatives(e: &Expr, x: &[f64]) {
        let f = |y: &[f64]| e.value(y);
        let g_fd = fd::gradient(&f, x, 1e-6);
        let mut g = vec![0.0; x.len()];
        e.add_gradient(x, 1.0, &mut g);
        for i in 0..x.len() {
            assert_relative_eq!(g[i], g_fd[i], epsilon = 1e-6, max_relative = 1e-6);
        }

        let h_fd = fd::hessian(&f, x, 1e-5);
        let mut entries = Vec::new();
        e.hessian_entries(x, 1.0, &mut |i, j, v| entries.push((i, j, v)));
        let h = fd::dense_from_upper_entries(x.len(), &entries);
        for i in 0..x.len() {
            for j in 0..x.len() {
                assert_relative_eq!(h[i][j], h_fd[i][j], epsilon = 1e-4, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences_on_random_expressions() {
        for seed in 0..30 {
            let n = 6;
            let e = random_expr(seed, n);
            let x = random_point(seed, n);
            check_expr_derivatives(&e, &x);
        }
    }

    #[test]
    fn aliased_indices_fold_correctly() {
        // a·V² self term: both voltage slots and both angle slots alias.
        let mut e = Expr::new();
        e.add_pair(PairTerm {
            vi: 0,
            thi: 1,
            vj: 0,
            thj: 1,
            a: 0.7,
            b: -0.3,
        });
        // c·x² bilinear self term and c·x⁴ quartic self term.
        e.add_quad(2, 2, 1.3);
        e.add_sqsq(3, 3, -0.4);
        let x = [1.05, 0.3, 0.8, 1.2];
        assert_relative_eq!(
            e.value(&x),
            0.7 * 1.05 * 1.05 + 1.3 * 0.8 * 0.8 - 0.4 * 1.2f64.powi(4),
            max_relative = 1e-12
        );
        check_expr_derivatives(&e, &x);
    }

    #[test]
    fn sum_squares_matches_finite_differences() {
        for seed in 0..20 {
            let n = 6;
            let p = random_expr(seed, n);
            let q = random_expr(seed ^ 0xABCD, n);
            let h = Ineq::sum_squares(p, q, 1.7);
            let x = random_point(seed, n);

            let f = |y: &[f64]| h.value(y);
            let g_fd = fd::gradient(&f, &x, 1e-6);
            let mut g = vec![0.0; n];
            h.add_gradient(&x, 1.0, &mut g);
            for i in 0..n {
                assert_relative_eq!(g[i], g_fd[i], epsilon = 2e-5, max_relative = 2e-5);
            }

            let h_fd = fd::hessian(&f, &x, 1e-5);
            let mut entries = Vec::new();
            h.hessian_entries(&x, 1.0, &mut |i, j, v| entries.push((i, j, v)));
            let hd = fd::dense_from_upper_entries(n, &entries);
            for i in 0..n {
                for j in 0..n {
                    assert_relative_eq!(hd[i][j], h_fd[i][j], epsilon = 2e-3, max_relative = 2e-3);
                }
            }
        }
    }

    #[test]
    fn emission_structure_is_value_independent() {
        // The assembler registers patterns at one point and refills values
        // at others; the emitted (i, j) sequence must match exactly.
        let e = random_expr(42, 5);
        let xa = random_point(1, 5);
        let xb = random_point(2, 5);
        let mut seq_a = Vec::new();
        let mut seq_b = Vec::new();
        e.hessian_entries(&xa, 1.0, &mut |i, j, _| seq_a.push((i, j)));
        e.hessian_entries(&xb, 1.0, &mut |i, j, _| seq_b.push((i, j)));
        assert_eq!(seq_a, seq_b);

        let mut ga = Vec::new();
        let mut gb = Vec::new();
        e.grad_entries(&xa, 1.0, &mut |i, _| ga.push(i));
        e.grad_entries(&xb, 1.0, &mut |i, _| gb.push(i));
        assert_eq!(ga, gb);
    }

    #[test]
    fn weight_scales_linearly() {
        let e = random_expr(7, 4);
        let x = random_point(7, 4);
        let mut g1 = vec![0.0; 4];
        let mut g3 = vec![0.0; 4];
        e.add_gradient(&x, 1.0, &mut g1);
        e.add_gradient(&x, 3.0, &mut g3);
        for i in 0..4 {
            assert_relative_eq!(3.0 * g1[i], g3[i], max_relative = 1e-14);
        }
    }
}
