//! Sparse numeric kernels for the interior-point solver: compressed
//! sparse column assembly with a reusable symbolic pattern, fill-reducing
//! AMD ordering, and an up-looking LDL^T factorization with inertia
//! readout for symmetric (quasi-definite) KKT systems.
//!
//! The KKT matrices solved here keep a fixed sparsity pattern across
//! iterations, so all symbolic work — triplet deduplication, ordering,
//! elimination tree, factor allocation — happens once per problem and only
//! the numeric refactorization runs per Newton step.

use thiserror::Error;

const NONE: usize = usize::MAX;

/// Errors from the numeric factorization.
#[derive(Debug, Error)]
pub enum SparseError {
    /// A pivot was exactly zero or non-finite; the caller should regularize
    /// the matrix and retry.
    #[error("zero or non-finite pivot at column {0} during LDL^T factorization")]
    ZeroPivot(usize),
}

/// Inertia of a factored symmetric matrix: counts of positive, negative and
/// zero pivots in `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

/// A sparsity pattern built once from (row, col) triplets, with a map that
/// scatters per-triplet values into deduplicated CSC storage on every
/// refill. Triplets hitting the same entry accumulate.
#[derive(Debug, Clone)]
pub struct Pattern {
    pub n_rows: usize,
    pub n_cols: usize,
    pub col_ptr: Vec<usize>,
    pub row_ind: Vec<usize>,
    /// For each original triplet, the index of its CSC slot.
    map: Vec<usize>,
}

impl Pattern {
    /// Deduplicate `triplets` into sorted CSC form, remembering where each
    /// triplet lands so `fill` can re-scatter new values cheaply.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize)]) -> Self {
        for &(r, c) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r},{c}) out of bounds");
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].1, triplets[k].0));

        let mut col_ptr = vec![0usize; n_cols + 1];
        let mut row_ind = Vec::new();
        let mut map = vec![0usize; triplets.len()];
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (r, c) = triplets[k];
            if last != Some((r, c)) {
                row_ind.push(r);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
            map[k] = row_ind.len() - 1;
        }
        for c in 0..n_cols {
            col_ptr[c + 1] += col_ptr[c];
        }
        Pattern {
            n_rows,
            n_cols,
            col_ptr,
            row_ind,
            map,
        }
    }

    pub fn nnz(&self) -> usize {
        self.row_ind.len()
    }

    /// Scatter `triplet_values` (one per original triplet, in the original
    /// order) into `values`, which is resized to `nnz()` and zeroed first.
    pub fn fill(&self, triplet_values: &[f64], values: &mut Vec<f64>) {
        assert_eq!(triplet_values.len(), self.map.len());
        values.clear();
        values.resize(self.nnz(), 0.0);
        for (k, &v) in triplet_values.iter().enumerate() {
            values[self.map[k]] += v;
        }
    }

    /// `y += alpha * A * x` for the pattern plus a matching value slice.
    pub fn mul_add(&self, values: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) {
        for c in 0..self.n_cols {
            let xc = alpha * x[c];
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                y[self.row_ind[p]] += values[p] * xc;
            }
        }
    }

    /// `y += alpha * A^T * x` for the pattern plus a matching value slice.
    pub fn mul_transpose_add(&self, values: &[f64], x: &[f64], alpha: f64, y: &mut [f64]) {
        for c in 0..self.n_cols {
            let mut acc = 0.0;
            for p in self.col_ptr[c]..self.col_ptr[c + 1] {
                acc += values[p] * x[self.row_ind[p]];
            }
            y[c] += alpha * acc;
        }
    }
}

/// Symbolic LDL^T factorization of a symmetric matrix given by the upper
/// triangle (diagonal included) of a [`Pattern`]: AMD ordering, elimination
/// tree, and factor column counts. Reused across numeric refactorizations.
#[derive(Debug)]
pub struct LdlSymbolic {
    n: usize,
    /// `perm[new] = old` column ordering from AMD.
    perm: Vec<usize>,
    /// Permuted upper-triangular pattern.
    up_col_ptr: Vec<usize>,
    up_row_ind: Vec<usize>,
    /// Maps entry `k` of the caller's CSC values into the permuted pattern.
    value_map: Vec<usize>,
    /// Elimination tree parents over the permuted pattern.
    parent: Vec<usize>,
    /// Column pointers of L (strictly lower triangular part).
    l_col_ptr: Vec<usize>,
}

/// Numeric workspace and factor storage matching one [`LdlSymbolic`].
#[derive(Debug)]
pub struct LdlNumeric {
    l_row_ind: Vec<usize>,
    l_values: Vec<f64>,
    d: Vec<f64>,
    // Scratch buffers for refactorization and permuted solves.
    up_values: Vec<f64>,
    y: Vec<f64>,
    pat: Vec<usize>,
    flag: Vec<usize>,
    l_next: Vec<usize>,
    work: Vec<f64>,
}

impl LdlSymbolic {
    /// Build the symbolic factorization for the upper triangle of a
    /// symmetric `n` x `n` matrix. `upper` must contain only entries with
    /// `row <= col`; every diagonal entry the numeric phase needs must be
    /// structurally present (register explicit zeros when in doubt).
    pub fn new(upper: &Pattern) -> Self {
        assert_eq!(upper.n_rows, upper.n_cols, "matrix must be square");
        let n = upper.n_cols;
        for c in 0..n {
            for p in upper.col_ptr[c]..upper.col_ptr[c + 1] {
                assert!(upper.row_ind[p] <= c, "pattern must be upper triangular");
            }
        }

        let (perm, pinv) = if n == 0 {
            (Vec::new(), Vec::new())
        } else {
            let (p, pinv, _info) =
                amd::order::<usize>(n, &upper.col_ptr, &upper.row_ind, &amd::Control::default())
                    .expect("AMD ordering failed on a structurally valid pattern");
            (p, pinv)
        };

        // Permute the upper pattern: entry (i, j) -> canonical upper
        // (min, max) of (pinv[i], pinv[j]).
        let mut trips = Vec::with_capacity(upper.nnz());
        for c in 0..n {
            for p in upper.col_ptr[c]..upper.col_ptr[c + 1] {
                let (pi, pj) = (pinv[upper.row_ind[p]], pinv[c]);
                trips.push((pi.min(pj), pi.max(pj)));
            }
        }
        let permuted = Pattern::from_triplets(n, n, &trips);

        // Elimination tree and per-column fill counts of L over the
        // permuted pattern (Liu's algorithm on the upper triangle).
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut l_nz = vec![0usize; n];
        for j in 0..n {
            flag[j] = j;
            for p in permuted.col_ptr[j]..permuted.col_ptr[j + 1] {
                let mut i = permuted.row_ind[p];
                while i != j && flag[i] != j {
                    if parent[i] == NONE {
                        parent[i] = j;
                    }
                    l_nz[i] += 1;
                    flag[i] = j;
                    i = parent[i];
                }
            }
        }
        let mut l_col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            l_col_ptr[j + 1] = l_col_ptr[j] + l_nz[j];
        }

        LdlSymbolic {
            n,
            perm,
            up_col_ptr: permuted.col_ptr,
            up_row_ind: permuted.row_ind,
            value_map: permuted.map,
            parent,
            l_col_ptr,
        }
    }

    /// Allocate a numeric workspace sized for this symbolic factorization.
    pub fn numeric(&self) -> LdlNumeric {
        let l_nnz = self.l_col_ptr[self.n];
        LdlNumeric {
            l_row_ind: vec![0; l_nnz],
            l_values: vec![0.0; l_nnz],
            d: vec![0.0; self.n],
            up_values: vec![0.0; self.up_row_ind.len()],
            y: vec![0.0; self.n],
            pat: vec![0; self.n],
            flag: vec![NONE; self.n],
            l_next: vec![0; self.n],
            work: vec![0.0; self.n],
        }
    }

    /// Numerically refactor with `values` aligned to the caller's original
    /// upper-triangle CSC (the same `Pattern` passed to `new`). Returns the
    /// inertia on success.
    pub fn refactor(&self, values: &[f64], num: &mut LdlNumeric) -> Result<Inertia, SparseError> {
        let n = self.n;
        assert_eq!(values.len(), self.value_map.len());

        // Scatter into the permuted pattern.
        num.up_values.iter_mut().for_each(|v| *v = 0.0);
        for (k, &v) in values.iter().enumerate() {
            num.up_values[self.value_map[k]] += v;
        }

        num.l_next.copy_from_slice(&self.l_col_ptr[..n]);
        num.flag.iter_mut().for_each(|f| *f = NONE);
        num.y.iter_mut().for_each(|v| *v = 0.0);

        for k in 0..n {
            // Scatter column k of the permuted upper matrix and collect the
            // nonzero pattern of row k of L by walking the elimination tree.
            let mut dk = 0.0;
            let mut pat_len = 0usize;
            for p in self.up_col_ptr[k]..self.up_col_ptr[k + 1] {
                let i = self.up_row_ind[p];
                if i == k {
                    dk += num.up_values[p];
                    continue;
                }
                num.y[i] += num.up_values[p];
                let mut t = i;
                while t != NONE && t < k && num.flag[t] != k {
                    num.flag[t] = k;
                    num.pat[pat_len] = t;
                    pat_len += 1;
                    t = self.parent[t];
                }
            }
            // Ascending order is a topological order along ancestor paths.
            num.pat[..pat_len].sort_unstable();

            for idx in 0..pat_len {
                let j = num.pat[idx];
                let yj = num.y[j];
                num.y[j] = 0.0;
                for p in self.l_col_ptr[j]..num.l_next[j] {
                    num.y[num.l_row_ind[p]] -= num.l_values[p] * yj;
                }
                let lkj = yj / num.d[j];
                dk -= lkj * yj;
                num.l_row_ind[num.l_next[j]] = k;
                num.l_values[num.l_next[j]] = lkj;
                num.l_next[j] += 1;
            }
            if dk == 0.0 || !dk.is_finite() {
                return Err(SparseError::ZeroPivot(k));
            }
            num.d[k] = dk;
        }

        let mut inertia = Inertia {
            positive: 0,
            negative: 0,
            zero: 0,
        };
        for &dk in &num.d {
            if dk > 0.0 {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
        }
        Ok(inertia)
    }

    /// Solve `A x = b` in place using a completed factorization.
    pub fn solve(&self, num: &mut LdlNumeric, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in 0..n {
            num.work[k] = b[self.perm[k]];
        }
        // Forward: L y = Pb (unit diagonal).
        for j in 0..n {
            let yj = num.work[j];
            if yj != 0.0 {
                for p in self.l_col_ptr[j]..self.l_col_ptr[j + 1] {
                    num.work[num.l_row_ind[p]] -= num.l_values[p] * yj;
                }
            }
        }
        // Diagonal and backward: L^T z = D^{-1} y.
        for j in 0..n {
            num.work[j] /= num.d[j];
        }
        for j in (0..n).rev() {
            let mut acc = num.work[j];
            for p in self.l_col_ptr[j]..self.l_col_ptr[j + 1] {
                acc -= num.l_values[p] * num.work[num.l_row_ind[p]];
            }
            num.work[j] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = num.work[k];
        }
    }
}
