//! Transcription of the diffusion control problem into a quadratic program.
//!
//! The continuous problem is
//!
//! ```text
//! minimize  J = r1 ∫∫ x² + r2 ∫∫ u²   over [0, L] × [0, t_f]
//! subject to x_t = x_yy + u,  x(y, 0) = f(y),  x_y(0, t) = x_y(L, t) = 0
//! ```
//!
//! With `φ = x_yy` the state is `x(y, t) = f(y) + ∫_0^t (φ + u)`, and the
//! dynamics become the integral equation
//!
//! ```text
//! I²_y φ(·, t)(y) − ∫_0^t (φ + u)(y, s) ds + ∫_0^t (φ + u)(0, s) ds = f(y) − f(0)
//! ```
//!
//! together with `∫_0^L φ(y, t) dy = 0` for every `t`.
//!
//! Unknowns are stored as `Z = [φ̂; û]`. Each block samples its field on the
//! spatial nodes `y_0..y_{N_y}` plus the point `y = 0` (spatial index
//! `N_y + 1`) at every temporal node, in the order `index(i, j) = i + j (N_y + 2)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::intmat::{first_order_matrix, IntegrationOperator};
use crate::nodes::{sgg_rule, QuadratureRule};
use crate::polycore::BasisSpec;
use crate::qpsolve::{self, QpSolution, QuadraticProgram};

pub type InitialCondition = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct DiffusionOcp {
    pub length: f64,
    pub final_time: f64,
    pub r1: f64,
    pub r2: f64,
    initial: InitialCondition,
    /// `∫_0^L f²`, when known in closed form.
    pub initial_square_integral: Option<f64>,
}

impl fmt::Debug for DiffusionOcp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffusionOcp")
            .field("length", &self.length)
            .field("final_time", &self.final_time)
            .field("r1", &self.r1)
            .field("r2", &self.r2)
            .field("initial_square_integral", &self.initial_square_integral)
            .finish_non_exhaustive()
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, found {v}"),
        })
    }
}

impl DiffusionOcp {
    /// `r1` may be zero (state not penalised); `r2` must be positive.
    pub fn new<F>(length: f64, final_time: f64, r1: f64, r2: f64, initial: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        positive("length", length)?;
        positive("final_time", final_time)?;
        positive("r2", r2)?;
        if !(r1.is_finite() && r1 >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "r1",
                reason: format!("must be non-negative and finite, found {r1}"),
            });
        }
        Ok(Self {
            length,
            final_time,
            r1,
            r2,
            initial: Arc::new(initial),
            initial_square_integral: None,
        })
    }

    /// `L = 4`, `t_f = 1`, `r1 = r2 = 1/2`, `f(y) = 1 + y`.
    pub fn reference() -> Self {
        Self::new(4.0, 1.0, 0.5, 0.5, |y| 1.0 + y)
            .expect("reference parameters are valid")
            .with_square_integral(124.0 / 3.0)
    }

    pub fn with_square_integral(mut self, value: f64) -> Self {
        self.initial_square_integral = Some(value);
        self
    }

    pub fn initial(&self, y: f64) -> f64 {
        (self.initial)(y)
    }

    pub fn initial_fn(&self) -> InitialCondition {
        Arc::clone(&self.initial)
    }
}

/// Index bookkeeping for a grid with `N_y + 1` spatial and `N_t + 1`
/// temporal nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridIndexMap {
    ny: usize,
    nt: usize,
}

impl GridIndexMap {
    pub fn new(ny: usize, nt: usize) -> Result<Self> {
        if ny == 0 || nt == 0 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: format!("N_y and N_t must be at least 1, found ({ny}, {nt})"),
            });
        }
        Ok(Self { ny, nt })
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    /// `L' = N_y + N_t + N_y N_t`.
    pub fn l_prime(&self) -> usize {
        self.ny + self.nt + self.ny * self.nt
    }

    /// `L'' = N_y + N_t (N_y + 2)`.
    pub fn l_double_prime(&self) -> usize {
        self.ny + self.nt * (self.ny + 2)
    }

    /// Length of one of the φ̂, û blocks.
    pub fn block_len(&self) -> usize {
        (self.ny + 2) * (self.nt + 1)
    }

    pub fn z_len(&self) -> usize {
        2 * self.block_len()
    }

    /// Number of collocation points `(N_y + 1)(N_t + 1)`.
    pub fn interior_len(&self) -> usize {
        (self.ny + 1) * (self.nt + 1)
    }

    pub fn num_constraints(&self) -> usize {
        self.interior_len() + self.nt + 1
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i + j * (self.ny + 2)
    }

    /// Block positions `n` with `(n + 1) mod (N_y + 2) ≠ 0`, i.e. every
    /// `(i, j)` except the `y = 0` entries.
    pub fn filtered_rows(&self) -> Vec<usize> {
        (0..=self.l_double_prime())
            .filter(|n| (n + 1) % (self.ny + 2) != 0)
            .collect()
    }

    /// `Λ_q = q + ⌊q / (N_y + 1)⌋` for `q = 0..=L'`.
    pub fn lambda(&self) -> Vec<usize> {
        (0..=self.l_prime()).map(|q| q + q / (self.ny + 1)).collect()
    }

    /// Block position of entry `i` of the k-major (spatial-major) ordering.
    pub fn check_to_hat(&self, i: usize) -> usize {
        self.index(i / (self.nt + 1), i % (self.nt + 1))
    }

    /// j-major interior vector (`x̄`, `ū`) to k-major.
    pub fn bar_to_check(&self, v: &[f64]) -> Vec<f64> {
        let (ny1, nt1) = (self.ny + 1, self.nt + 1);
        (0..ny1 * nt1).map(|m| v[(m % nt1) * ny1 + m / nt1]).collect()
    }

    /// Inverse of [`Self::bar_to_check`].
    pub fn check_to_bar(&self, v: &[f64]) -> Vec<f64> {
        let (ny1, nt1) = (self.ny + 1, self.nt + 1);
        (0..ny1 * nt1).map(|g| v[(g % ny1) * nt1 + g / ny1]).collect()
    }
}

/// The integration operators a transcription needs.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    /// First order on `[0, L]`, carrying the full-interval row.
    pub y1: IntegrationOperator,
    pub y2: IntegrationOperator,
    /// First order on `[0, t_f]`, carrying the full-interval row.
    pub t1: IntegrationOperator,
}

impl OperatorSet {
    pub fn build(ocp: &DiffusionOcp, grid: &GridIndexMap, alpha: f64) -> Result<Self> {
        let rule_y = sgg_rule(BasisSpec::new(alpha, ocp.length, grid.ny)?)?;
        let rule_t = sgg_rule(BasisSpec::new(alpha, ocp.final_time, grid.nt)?)?;
        let y1 = first_order_matrix(&rule_y)?;
        let y2 = y1.higher_order(2)?;
        let t1 = first_order_matrix(&rule_t)?;
        Ok(Self { y1, y2, t1 })
    }

    pub fn rule_y(&self) -> &QuadratureRule {
        &self.y1.rule
    }

    pub fn rule_t(&self) -> &QuadratureRule {
        &self.t1.rule
    }

    pub fn full_row_y(&self) -> &[f64] {
        self.y1.full_interval_row.as_deref().unwrap_or_default()
    }

    pub fn full_row_t(&self) -> &[f64] {
        self.t1.full_interval_row.as_deref().unwrap_or_default()
    }
}

fn check_size(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            found,
        })
    }
}

/// Discrete dynamics `Ā φ̂ + B̄ û = b̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub a_bar: DMatrix<f64>,
    pub b_bar: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// Rows are ordered `r = i + j (N_y + 1)`.
pub fn assemble_dynamics(
    ocp: &DiffusionOcp,
    grid: &GridIndexMap,
    y2: &IntegrationOperator,
    t1: &IntegrationOperator,
) -> Result<Dynamics> {
    let (ny, nt) = (grid.ny, grid.nt);
    check_size("spatial operator size", ny + 1, y2.size())?;
    check_size("temporal operator size", nt + 1, t1.size())?;
    if y2.order != 2 || t1.order != 1 {
        return Err(Error::InvalidParameter {
            name: "operators",
            reason: format!(
                "expected spatial order 2 and temporal order 1, found {} and {}",
                y2.order, t1.order
            ),
        });
    }
    let rows = grid.interior_len();
    let cols = grid.block_len();
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    let f0 = ocp.initial(0.0);
    for (r, n) in grid.filtered_rows().into_iter().enumerate() {
        let (i, j) = (n % (ny + 2), n / (ny + 2));
        for k in 0..=ny {
            a[(r, grid.index(k, j))] += y2.matrix[(i, k)];
        }
        for k in 0..=nt {
            let p = t1.matrix[(j, k)];
            a[(r, grid.index(i, k))] -= p;
            a[(r, grid.index(ny + 1, k))] += p;
            b[(r, grid.index(i, k))] -= p;
            b[(r, grid.index(ny + 1, k))] += p;
        }
        rhs[r] = ocp.initial(y2.rule.nodes[i]) - f0;
    }
    Ok(Dynamics {
        a_bar: a,
        b_bar: b,
        rhs,
    })
}

/// Rows `j = 0..=N_t` of the boundary constraint `Ψ Z = 0`.
pub fn assemble_boundary(grid: &GridIndexMap, full_row_y: &[f64]) -> Result<DMatrix<f64>> {
    check_size("full-interval row", grid.ny + 1, full_row_y.len())?;
    let lambda = grid.lambda();
    let mut psi = DMatrix::zeros(grid.nt + 1, grid.z_len());
    for (q, &col) in lambda.iter().enumerate() {
        psi[(q / (grid.ny + 1), col)] = full_row_y[q % (grid.ny + 1)];
    }
    Ok(psi)
}

/// `H = [[Ā, B̄]; Ψ]`, `b = [b̄; 0]`.
pub fn combine(dynamics: &Dynamics, psi: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let rows = dynamics.a_bar.nrows();
    check_size("B̄ rows", rows, dynamics.b_bar.nrows())?;
    check_size("b̄ length", rows, dynamics.rhs.len())?;
    let block = dynamics.a_bar.ncols();
    check_size("B̄ columns", block, dynamics.b_bar.ncols())?;
    check_size("Ψ columns", 2 * block, psi.ncols())?;
    let total = rows + psi.nrows();
    let mut h = DMatrix::zeros(total, 2 * block);
    h.view_mut((0, 0), (rows, block)).copy_from(&dynamics.a_bar);
    h.view_mut((0, block), (rows, block)).copy_from(&dynamics.b_bar);
    h.view_mut((rows, 0), (psi.nrows(), 2 * block)).copy_from(psi);
    let mut b = DVector::zeros(total);
    b.rows_mut(0, rows).copy_from(&dynamics.rhs);
    Ok((h, b))
}

/// Affine map `x̄ = M Z + f̄` from unknowns to interior states, j-major.
pub fn state_map(
    ocp: &DiffusionOcp,
    grid: &GridIndexMap,
    t1: &IntegrationOperator,
    y_nodes: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_size("temporal operator size", grid.nt + 1, t1.size())?;
    check_size("spatial nodes", grid.ny + 1, y_nodes.len())?;
    let (ny1, nt1) = (grid.ny + 1, grid.nt + 1);
    let block = grid.block_len();
    let mut m = DMatrix::zeros(ny1 * nt1, grid.z_len());
    let mut fbar = DVector::zeros(ny1 * nt1);
    for l in 0..nt1 {
        for k in 0..ny1 {
            let g = k + l * ny1;
            for s in 0..nt1 {
                let p = t1.matrix[(l, s)];
                m[(g, grid.index(k, s))] += p;
                m[(g, block + grid.index(k, s))] += p;
            }
            fbar[g] = ocp.initial(y_nodes[k]);
        }
    }
    Ok((m, fbar))
}

/// Quadratic cost `Zᵀ Q Z + cᵀ Z + j0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostForm {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub j0: f64,
}

fn tensor_weights(grid: &GridIndexMap, full_row_y: &[f64], full_row_t: &[f64]) -> Vec<f64> {
    let ny1 = grid.ny + 1;
    (0..grid.interior_len())
        .map(|g| full_row_t[g / ny1] * full_row_y[g % ny1])
        .collect()
}

pub fn assemble_cost(ocp: &DiffusionOcp, grid: &GridIndexMap, ops: &OperatorSet) -> Result<CostForm> {
    let (wy, wt) = (ops.full_row_y(), ops.full_row_t());
    check_size("spatial full-interval row", grid.ny + 1, wy.len())?;
    check_size("temporal full-interval row", grid.nt + 1, wt.len())?;
    let w = tensor_weights(grid, wy, wt);
    let (m, fbar) = state_map(ocp, grid, &ops.t1, &ops.rule_y().nodes)?;

    let mut wm = m.clone();
    for (g, mut row) in wm.row_iter_mut().enumerate() {
        row *= w[g];
    }
    let mut q = m.transpose() * &wm * ocp.r1;
    let block = grid.block_len();
    let ny1 = grid.ny + 1;
    for (g, wg) in w.iter().enumerate() {
        let col = block + grid.index(g % ny1, g / ny1);
        q[(col, col)] += ocp.r2 * wg;
    }
    // Exact symmetry; the product above is symmetric only up to round-off.
    let q = (&q + q.transpose()) * 0.5;
    let wf = DVector::from_iterator(w.len(), w.iter().zip(fbar.iter()).map(|(a, b)| a * b));
    let c = m.transpose() * &wf * (2.0 * ocp.r1);
    let j0 = ocp.r1 * fbar.dot(&wf);
    Ok(CostForm { q, c, j0 })
}

/// The discrete cost written as the double sum over the k-major grid,
/// `r1 Σ_{k,l} w_k w_l x̂²_{kl} + r2 Σ_{k,l} w_k w_l ǔ²_{kl}`, evaluated term
/// by term without forming any matrix.
pub fn cost_by_summation(
    ocp: &DiffusionOcp,
    grid: &GridIndexMap,
    ops: &OperatorSet,
    z: &[f64],
) -> Result<f64> {
    check_size("Z length", grid.z_len(), z.len())?;
    let (ny1, nt1) = (grid.ny + 1, grid.nt + 1);
    let block = grid.block_len();
    let (wy, wt) = (ops.full_row_y(), ops.full_row_t());
    let pt = &ops.t1.matrix;
    let y = &ops.rule_y().nodes;

    let phi_check: Vec<f64> = (0..ny1 * nt1).map(|i| z[grid.check_to_hat(i)]).collect();
    let u_check: Vec<f64> = (0..ny1 * nt1)
        .map(|i| z[block + grid.check_to_hat(i)])
        .collect();

    let mut state = 0.0;
    let mut control = 0.0;
    for k in 0..ny1 {
        for l in 0..nt1 {
            let m = k * nt1 + l;
            let mut x = ocp.initial(y[k]);
            for s in 0..nt1 {
                let i = k * nt1 + s;
                x += pt[(l, s)] * (phi_check[i] + u_check[i]);
            }
            let w = wy[k] * wt[l];
            state += w * x * x;
            control += w * u_check[m] * u_check[m];
        }
    }
    Ok(ocp.r1 * state + ocp.r2 * control)
}

/// State on the full grid: `x[(i, j)] = Σ_s P_{js}(φ + u)(y_i, t_s) + f(y_i)`
/// for `i = 0..=N_y + 1` (row `N_y + 1` is `y = 0`) and `j = 0..=N_t`.
pub fn recover_state(
    z: &[f64],
    grid: &GridIndexMap,
    t1: &IntegrationOperator,
    ocp: &DiffusionOcp,
    y_nodes: &[f64],
) -> Result<DMatrix<f64>> {
    check_size("Z length", grid.z_len(), z.len())?;
    check_size("temporal operator size", grid.nt + 1, t1.size())?;
    check_size("spatial nodes", grid.ny + 1, y_nodes.len())?;
    let block = grid.block_len();
    let (ny2, nt1) = (grid.ny + 2, grid.nt + 1);
    Ok(DMatrix::from_fn(ny2, nt1, |i, j| {
        let y = if i == grid.ny + 1 { 0.0 } else { y_nodes[i] };
        let integral: f64 = (0..nt1)
            .map(|s| {
                let n = grid.index(i, s);
                t1.matrix[(j, s)] * (z[n] + z[block + n])
            })
            .sum();
        integral + ocp.initial(y)
    }))
}

/// Splits `Z` into φ and u grids of shape `(N_y + 2) × (N_t + 1)`.
pub fn unpack(z: &[f64], grid: &GridIndexMap) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_size("Z length", grid.z_len(), z.len())?;
    let block = grid.block_len();
    let phi = DMatrix::from_fn(grid.ny + 2, grid.nt + 1, |i, j| z[grid.index(i, j)]);
    let u = DMatrix::from_fn(grid.ny + 2, grid.nt + 1, |i, j| z[block + grid.index(i, j)]);
    Ok((phi, u))
}

#[derive(Debug, Clone)]
pub struct DiscreteQp {
    pub program: QuadraticProgram,
    pub grid: GridIndexMap,
}

impl DiscreteQp {
    pub fn solve(&self) -> Result<QpSolution> {
        qpsolve::solve(&self.program)
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        self.program.objective(z)
    }
}

/// Everything built for one `(N_y, N_t, α)` instance.
#[derive(Debug, Clone)]
pub struct Transcription {
    pub ocp: DiffusionOcp,
    pub alpha: f64,
    pub ops: OperatorSet,
    pub qp: DiscreteQp,
}

impl Transcription {
    pub fn grid(&self) -> &GridIndexMap {
        &self.qp.grid
    }

    pub fn recover_state(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        recover_state(z, self.grid(), &self.ops.t1, &self.ocp, &self.ops.rule_y().nodes)
    }

    pub fn cost_by_summation(&self, z: &[f64]) -> Result<f64> {
        cost_by_summation(&self.ocp, self.grid(), &self.ops, z)
    }
}

pub fn transcribe(ocp: &DiffusionOcp, ny: usize, nt: usize, alpha: f64) -> Result<Transcription> {
    let grid = GridIndexMap::new(ny, nt)?;
    let ops = OperatorSet::build(ocp, &grid, alpha)?;
    let dynamics = assemble_dynamics(ocp, &grid, &ops.y2, &ops.t1)?;
    let psi = assemble_boundary(&grid, ops.full_row_y())?;
    let (h, b) = combine(&dynamics, &psi)?;
    let cost = assemble_cost(ocp, &grid, &ops)?;
    let program = QuadraticProgram::new(h, b, cost.q, cost.c, cost.j0)?;
    Ok(Transcription {
        ocp: ocp.clone(),
        alpha,
        ops,
        qp: DiscreteQp { program, grid },
    })
}
