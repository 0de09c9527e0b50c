//! Solving single cells and sweeps, plus the accuracy diagnostics.

use std::fmt;
use std::time::Instant;

use gegenopt_core::transcribe::{transcribe, unpack};
use gegenopt_core::{DiffusionOcp, Interpolant2D, QpSolution, Transcription};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, RunConfig};

/// A failure with the stage and parameters it happened at.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub stage: &'static str,
    pub ny: usize,
    pub nt: usize,
    pub alpha: f64,
    pub message: String,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} failed for N_y={}, N_t={}, alpha={}: {}",
            self.stage, self.ny, self.nt, self.alpha, self.message
        )
    }
}

impl std::error::Error for RunError {}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellReport {
    pub objective: f64,
    pub feasibility: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub kkt_residual: f64,
    pub free_directions: usize,
    pub kkt_condition: f64,
    pub wall_time: f64,
}

/// One solved instance with everything needed to write artifacts.
#[derive(Debug, Clone)]
pub struct Solved {
    pub transcription: Transcription,
    pub solution: QpSolution,
    /// `(N_y + 2) × (N_t + 1)`; the last row is `y = 0`.
    pub state: DMatrix<f64>,
    pub phi: DMatrix<f64>,
    pub control: DMatrix<f64>,
    pub report: CellReport,
}

impl Solved {
    pub fn ny(&self) -> usize {
        self.transcription.grid().ny()
    }

    pub fn nt(&self) -> usize {
        self.transcription.grid().nt()
    }

    pub fn alpha(&self) -> f64 {
        self.transcription.alpha
    }

    /// Interpolant of the state on the collocation nodes.
    pub fn state_interpolant(&self) -> Interpolant2D<'_> {
        interior_interpolant(&self.transcription, &self.state)
    }

    pub fn control_interpolant(&self) -> Interpolant2D<'_> {
        interior_interpolant(&self.transcription, &self.control)
    }
}

fn interior_interpolant<'a>(t: &'a Transcription, grid: &DMatrix<f64>) -> Interpolant2D<'a> {
    let ny1 = t.grid().ny() + 1;
    let interior = grid.rows(0, ny1).into_owned();
    Interpolant2D::new(t.ops.rule_y(), t.ops.rule_t(), interior)
        .expect("grid shape matches the rules")
}

/// `max_k |x̃(y_k, 0) − f(y_k)|` over `samples` uniform points in `[0, L]`.
pub fn psi1(t: &Transcription, state: &DMatrix<f64>, samples: usize) -> gegenopt_core::Result<f64> {
    let interp = interior_interpolant(t, state);
    let length = t.ocp.length;
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let y = length * k as f64 / (samples - 1) as f64;
        worst = worst.max((interp.eval(y, 0.0)? - t.ocp.initial(y)).abs());
    }
    Ok(worst)
}

/// `max_j |w_y · φ(·, t_j)|`, the boundary-constraint residual.
pub fn psi2(t: &Transcription, phi: &DMatrix<f64>) -> f64 {
    let w = t.ops.full_row_y();
    (0..phi.ncols())
        .map(|j| {
            w.iter()
                .enumerate()
                .map(|(i, wi)| wi * phi[(i, j)])
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max)
}

pub fn run_cell(
    ocp: &DiffusionOcp,
    ny: usize,
    nt: usize,
    alpha: f64,
    eval_grid: usize,
) -> Result<Solved, RunError> {
    let fail = |stage: &'static str, e: gegenopt_core::Error| RunError {
        stage,
        ny,
        nt,
        alpha,
        message: e.to_string(),
    };
    let start = Instant::now();
    let transcription = transcribe(ocp, ny, nt, alpha).map_err(|e| fail("transcription", e))?;
    let solution = transcription.qp.solve().map_err(|e| fail("solve", e))?;
    let z = solution.z.as_slice();
    let state = transcription
        .recover_state(z)
        .map_err(|e| fail("state recovery", e))?;
    let (phi, control) = unpack(z, transcription.grid()).map_err(|e| fail("state recovery", e))?;
    let wall_time = start.elapsed().as_secs_f64();
    let psi1 = psi1(&transcription, &state, eval_grid).map_err(|e| fail("diagnostics", e))?;
    let report = CellReport {
        objective: solution.objective,
        feasibility: solution.feasibility,
        psi1,
        psi2: psi2(&transcription, &phi),
        kkt_residual: solution.kkt_residual,
        free_directions: solution.free_directions,
        kkt_condition: solution.condition_estimate,
        wall_time,
    };
    Ok(Solved {
        transcription,
        solution,
        state,
        phi,
        control,
        report,
    })
}

/// Solves the single cell a configuration describes.
pub fn run_single(config: &RunConfig) -> Result<Solved, Box<dyn std::error::Error>> {
    config.validate()?;
    let cells = config.cells()?;
    let &[(ny, nt, alpha)] = cells.as_slice() else {
        return Err(ConfigError(format!(
            "a single run needs exactly one (N, alpha) cell, got {}; pass --sweep",
            cells.len()
        ))
        .into());
    };
    Ok(run_cell(&config.ocp()?, ny, nt, alpha, config.eval_grid)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ny: usize,
    pub nt: usize,
    pub alpha: f64,
    pub outcome: Result<CellReport, RunError>,
}

/// Solves every cell in parallel; rows come back sorted by grid then `α`.
/// `keep` decides which solved cells are handed back in full.
pub fn run_sweep_with<K>(config: &RunConfig, keep: K) -> Result<(Vec<SweepRow>, Vec<Solved>), ConfigError>
where
    K: Fn(&Solved) -> bool + Sync,
{
    config.validate()?;
    let ocp = config.ocp()?;
    let cells = config.cells()?;
    let results: Vec<(SweepRow, Option<Solved>)> = cells
        .par_iter()
        .map(|&(ny, nt, alpha)| match run_cell(&ocp, ny, nt, alpha, config.eval_grid) {
            Ok(solved) => {
                let row = SweepRow {
                    ny,
                    nt,
                    alpha,
                    outcome: Ok(solved.report),
                };
                let kept = keep(&solved).then_some(solved);
                (row, kept)
            }
            Err(e) => (
                SweepRow {
                    ny,
                    nt,
                    alpha,
                    outcome: Err(e),
                },
                None,
            ),
        })
        .collect();
    let (rows, solved): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((rows, solved.into_iter().flatten().collect()))
}

pub fn run_sweep(config: &RunConfig) -> Result<Vec<SweepRow>, ConfigError> {
    run_sweep_with(config, |_| false).map(|(rows, _)| rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub section: &'static str,
    pub y: f64,
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// State and control sampled on a uniform `ny_samples × nt_samples` grid
/// (section `grid`) and along `y = L/2` (section `midpoint`).
pub fn emit_profiles(
    solved: &Solved,
    ny_samples: usize,
    nt_samples: usize,
) -> gegenopt_core::Result<Vec<ProfileRow>> {
    let x = solved.state_interpolant();
    let u = solved.control_interpolant();
    let length = solved.transcription.ocp.length;
    let tf = solved.transcription.ocp.final_time;
    let at = |k: usize, n: usize, span: f64| {
        if n < 2 {
            0.0
        } else {
            span * k as f64 / (n - 1) as f64
        }
    };
    let mut rows = Vec::with_capacity(ny_samples * nt_samples + nt_samples);
    for a in 0..ny_samples {
        let y = at(a, ny_samples, length);
        for b in 0..nt_samples {
            let t = at(b, nt_samples, tf);
            rows.push(ProfileRow {
                section: "grid",
                y,
                t,
                x: x.eval(y, t)?,
                u: u.eval(y, t)?,
            });
        }
    }
    let mid = 0.5 * length;
    for b in 0..nt_samples {
        let t = at(b, nt_samples, tf);
        rows.push(ProfileRow {
            section: "midpoint",
            y: mid,
            t,
            x: x.eval(mid, t)?,
            u: u.eval(mid, t)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialCondition;

    fn config(ny: usize, alpha: f64) -> RunConfig {
        RunConfig {
            ny: vec![ny],
            alpha: vec![alpha],
            ..RunConfig::default()
        }
    }

    #[test]
    fn single_reference_cell() {
        let s = run_single(&config(6, -0.2)).unwrap();
        assert!((s.report.objective - 15.0).abs() < 0.3);
        assert!(s.report.feasibility < 1e-8);
        assert!(s.report.psi2 < 1e-10);
        assert!(s.report.psi1.is_finite() && s.report.psi1 < 0.1);
        assert_eq!(s.state.shape(), (8, 7));
    }

    #[test]
    fn psi2_matches_boundary_rows_of_feasibility() {
        let s = run_single(&config(5, 0.3)).unwrap();
        let p = &s.transcription.qp.program;
        let residual = &p.h * &s.solution.z - &p.b;
        let rows = p.h.nrows();
        let nt1 = s.nt() + 1;
        let boundary = residual.rows(rows - nt1, nt1).amax();
        assert!((boundary - s.report.psi2).abs() <= 1e-12);
    }

    #[test]
    fn zero_data() {
        let cfg = RunConfig {
            initial: InitialCondition::polynomial(vec![0.0]),
            ..config(5, 0.0)
        };
        let s = run_single(&cfg).unwrap();
        assert!(s.report.objective.abs() <= 1e-10);
        assert!(s.solution.z.amax() <= 1e-10);
        assert!(s.report.feasibility <= 1e-10 && s.report.psi1 <= 1e-10 && s.report.psi2 <= 1e-10);
    }

    #[test]
    fn single_run_rejects_many_cells() {
        let cfg = RunConfig {
            ny: vec![4, 5],
            ..RunConfig::default()
        };
        assert!(run_single(&cfg).is_err());
    }

    #[test]
    fn sweep_is_ordered_and_matches_single_runs() {
        let cfg = RunConfig {
            ny: vec![5, 4],
            alpha: vec![0.5, -0.2, 0.0],
            ..RunConfig::default()
        };
        let rows = run_sweep(&cfg).unwrap();
        let keys: Vec<(usize, f64)> = rows.iter().map(|r| (r.ny, r.alpha)).collect();
        assert_eq!(
            keys,
            vec![(4, -0.2), (4, 0.0), (4, 0.5), (5, -0.2), (5, 0.0), (5, 0.5)]
        );
        let single = run_single(&config(5, 0.0)).unwrap().report;
        let from_sweep = rows[4].outcome.as_ref().unwrap();
        assert_eq!(from_sweep.objective.to_bits(), single.objective.to_bits());
        assert_eq!(from_sweep.psi1.to_bits(), single.psi1.to_bits());
    }

    #[test]
    fn profiles() {
        let s = run_single(&config(6, -0.2)).unwrap();
        let rows = emit_profiles(&s, 11, 5).unwrap();
        assert_eq!(rows.len(), 11 * 5 + 5);
        assert!(rows
            .iter()
            .all(|r| (0.0..=4.0).contains(&r.y) && (0.0..=1.0).contains(&r.t)));
        let first = rows.iter().find(|r| r.section == "midpoint").unwrap();
        assert_eq!((first.y, first.t), (2.0, 0.0));
        assert!((first.x - 3.0).abs() <= s.report.psi1 + 1e-12);
    }
}
