//! Dense solver for convex equality-constrained quadratic programs
//!
//! ```text
//! minimize  Zᵀ Q Z + cᵀ Z + j0   subject to  H Z = b
//! ```
//!
//! The optimum is the solution of the KKT system
//! `[[2Q, Hᵀ], [H, 0]] [Z; λ] = [−c; b]`, factorised by LU with partial
//! pivoting and improved by one step of iterative refinement.
//!
//! Directions that leave both the objective and the constraints unchanged
//! (`ker Q ∩ ker H`) make the KKT matrix singular without affecting the
//! optimal value. They are detected explicitly, reported in
//! [`QpSolution::free_directions`], and pinned by requiring `Z` to be
//! orthogonal to them, which selects the minimum-norm optimiser.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};

/// Relative tolerance for rank decisions.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProgram {
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub j0: f64,
}

impl QuadraticProgram {
    pub fn new(
        h: DMatrix<f64>,
        b: DVector<f64>,
        q: DMatrix<f64>,
        c: DVector<f64>,
        j0: f64,
    ) -> Result<Self> {
        let n = q.nrows();
        if q.ncols() != n {
            return Err(Error::Dimension {
                context: "Q columns",
                expected: n,
                found: q.ncols(),
            });
        }
        if c.len() != n {
            return Err(Error::Dimension {
                context: "c length",
                expected: n,
                found: c.len(),
            });
        }
        if h.ncols() != n {
            return Err(Error::Dimension {
                context: "H columns",
                expected: n,
                found: h.ncols(),
            });
        }
        if b.len() != h.nrows() {
            return Err(Error::Dimension {
                context: "b length",
                expected: h.nrows(),
                found: b.len(),
            });
        }
        Ok(Self { h, b, q, c, j0 })
    }

    pub fn num_vars(&self) -> usize {
        self.q.nrows()
    }

    pub fn num_constraints(&self) -> usize {
        self.h.nrows()
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        z.dot(&(&self.q * z)) + self.c.dot(z) + self.j0
    }

    /// `‖H Z − b‖∞`.
    pub fn feasibility(&self, z: &DVector<f64>) -> f64 {
        inf_norm(&(&self.h * z - &self.b))
    }

    /// `‖2 Q Z + c + Hᵀ λ‖∞`.
    pub fn stationarity(&self, z: &DVector<f64>, multipliers: &DVector<f64>) -> f64 {
        inf_norm(&(&self.q * z * 2.0 + &self.c + self.h.transpose() * multipliers))
    }

    fn check_finite(&self) -> Result<()> {
        let finite = |s: &[f64]| s.iter().all(|v| v.is_finite());
        if !finite(self.h.as_slice()) {
            return Err(Error::NonFinite("H"));
        }
        if !finite(self.b.as_slice()) {
            return Err(Error::NonFinite("b"));
        }
        if !finite(self.q.as_slice()) {
            return Err(Error::NonFinite("Q"));
        }
        if !finite(self.c.as_slice()) || !self.j0.is_finite() {
            return Err(Error::NonFinite("c"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub objective: f64,
    /// `‖2 Q Z + c + Hᵀ λ‖∞`.
    pub kkt_residual: f64,
    /// `‖H Z − b‖∞`.
    pub feasibility: f64,
    /// One multiplier per row of `H`.
    pub multipliers: DVector<f64>,
    /// Dimension of `ker Q ∩ ker H` pinned by the minimum-norm choice.
    pub free_directions: usize,
    /// 1-norm condition number of the factorised KKT matrix.
    pub condition_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub feasibility: f64,
    pub stationarity: f64,
    pub objective: f64,
    pub kkt_condition: f64,
    pub free_directions: usize,
}

pub(crate) fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Rows of an orthonormal basis for `ker [2Q; H]`.
fn shared_null_space(qp: &QuadraticProgram) -> DMatrix<f64> {
    let n = qp.num_vars();
    let m = qp.num_constraints();
    let stacked = DMatrix::from_fn(n + m, n, |r, c| {
        if r < n {
            2.0 * qp.q[(r, c)]
        } else {
            qp.h[(r - n, c)]
        }
    });
    let svd = SVD::new(stacked, false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let tol = RANK_TOLERANCE * smax.max(f64::MIN_POSITIVE);
    let null_rows: Vec<usize> = (0..n)
        .filter(|&k| k >= svd.singular_values.len() || svd.singular_values[k] <= tol)
        .collect();
    DMatrix::from_fn(null_rows.len(), n, |r, c| v_t[(null_rows[r], c)])
}

/// Checks that `H` has full row rank at tolerance `RANK_TOLERANCE · ‖H‖_max`.
fn check_row_rank(h: &DMatrix<f64>) -> Result<()> {
    if h.nrows() == 0 {
        return Ok(());
    }
    let scale = h.amax();
    if scale == 0.0 {
        return Err(Error::RankDeficient {
            context: "constraint matrix H",
            index: 0,
            scale: 0.0,
        });
    }
    let svd = SVD::new(h.clone(), false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let tol = RANK_TOLERANCE * scale;
    if sv.len() < h.nrows() {
        return Err(Error::RankDeficient {
            context: "constraint matrix H",
            index: sv.len(),
            scale: 0.0,
        });
    }
    if let Some(index) = sv.iter().position(|&s| s <= tol) {
        return Err(Error::RankDeficient {
            context: "constraint matrix H",
            index,
            scale: sv[index],
        });
    }
    Ok(())
}

/// Solves the program; see the module documentation for the method.
pub fn solve(qp: &QuadraticProgram) -> Result<QpSolution> {
    qp.check_finite()?;
    check_row_rank(&qp.h)?;

    let n = qp.num_vars();
    let m = qp.num_constraints();
    let free = shared_null_space(qp);
    let k = free.nrows();

    // Unbounded if the objective decreases linearly along a free direction.
    let drift = &free * &qp.c;
    if inf_norm(&drift) > RANK_TOLERANCE * inf_norm(&qp.c).max(1.0) {
        return Err(Error::Unbounded);
    }

    let size = n + m + k;
    let mut kkt = DMatrix::zeros(size, size);
    kkt.view_mut((0, 0), (n, n)).copy_from(&(&qp.q * 2.0));
    kkt.view_mut((n, 0), (m, n)).copy_from(&qp.h);
    kkt.view_mut((0, n), (n, m)).copy_from(&qp.h.transpose());
    kkt.view_mut((n + m, 0), (k, n)).copy_from(&free);
    kkt.view_mut((0, n + m), (n, k)).copy_from(&free.transpose());

    let mut rhs = DVector::zeros(size);
    rhs.rows_mut(0, n).copy_from(&(-&qp.c));
    rhs.rows_mut(n, m).copy_from(&qp.b);

    let lu = kkt.clone().lu();
    let u = lu.u();
    let pivot_scale = kkt.amax();
    if let Some(index) = (0..size).find(|&i| u[(i, i)].abs() <= RANK_TOLERANCE * pivot_scale * 1e-6) {
        return Err(Error::RankDeficient {
            context: "KKT matrix",
            index,
            scale: u[(index, index)].abs(),
        });
    }
    let mut sol = lu.solve(&rhs).ok_or(Error::RankDeficient {
        context: "KKT matrix",
        index: size,
        scale: 0.0,
    })?;
    let residual = &rhs - &kkt * &sol;
    if let Some(delta) = lu.solve(&residual) {
        sol += delta;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("KKT solution"));
    }
    let condition_estimate = lu
        .try_inverse()
        .map(|inv| one_norm(&kkt) * one_norm(&inv))
        .unwrap_or(f64::INFINITY);

    let z = sol.rows(0, n).into_owned();
    let multipliers = sol.rows(n, m).into_owned();
    Ok(QpSolution {
        objective: qp.objective(&z),
        kkt_residual: qp.stationarity(&z, &multipliers),
        feasibility: qp.feasibility(&z),
        z,
        multipliers,
        free_directions: k,
        condition_estimate,
    })
}

/// Recomputes the residuals of a solution against its program.
pub fn diagnostics(sol: &QpSolution, qp: &QuadraticProgram) -> Diagnostics {
    Diagnostics {
        feasibility: qp.feasibility(&sol.z),
        stationarity: qp.stationarity(&sol.z, &sol.multipliers),
        objective: qp.objective(&sol.z),
        kkt_condition: sol.condition_estimate,
        free_directions: sol.free_directions,
    }
}
