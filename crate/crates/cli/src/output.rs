//! CSV and JSON artifacts. Numbers use 17 significant digits.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use gegenopt_core::dump::{fmt_value, write_matrix_csv, write_vector_csv};
use serde_json::json;

use crate::config::RunConfig;
use crate::runner::{ProfileRow, Solved, SweepRow};

pub const REPORT_HEADER: &str = "Ny,Nt,alpha,J,feasibility,psi1,psi2,kkt_residual,free_directions,kkt_condition,wall_time_s,status,error";

/// File-name stem for a cell: `<N>_<alpha>` or `<Ny>x<Nt>_<alpha>`.
pub fn cell_stem(ny: usize, nt: usize, alpha: f64) -> String {
    if ny == nt {
        format!("{ny}_{alpha}")
    } else {
        format!("{ny}x{nt}_{alpha}")
    }
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_report<W: Write>(mut out: W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{REPORT_HEADER}")?;
    for row in rows {
        write!(out, "{},{},{},", row.ny, row.nt, row.alpha)?;
        match &row.outcome {
            Ok(r) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},ok,",
                fmt_value(r.objective),
                fmt_value(r.feasibility),
                fmt_value(r.psi1),
                fmt_value(r.psi2),
                fmt_value(r.kkt_residual),
                r.free_directions,
                fmt_value(r.kkt_condition),
                fmt_value(r.wall_time),
            )?,
            Err(e) => writeln!(out, ",,,,,,,,failed,{}", csv_text(&e.to_string()))?,
        }
    }
    Ok(())
}

/// Columns `i,j,y,t,phi,u,x`; row `i = N_y + 1` is the `y = 0` point.
pub fn write_solution<W: Write>(mut out: W, solved: &Solved) -> io::Result<()> {
    writeln!(out, "i,j,y,t,phi,u,x")?;
    let y = &solved.transcription.ops.rule_y().nodes;
    let t = &solved.transcription.ops.rule_t().nodes;
    for j in 0..=solved.nt() {
        for i in 0..=solved.ny() + 1 {
            let yi = y.get(i).copied().unwrap_or(0.0);
            writeln!(
                out,
                "{i},{j},{},{},{},{},{}",
                fmt_value(yi),
                fmt_value(t[j]),
                fmt_value(solved.phi[(i, j)]),
                fmt_value(solved.control[(i, j)]),
                fmt_value(solved.state[(i, j)]),
            )?;
        }
    }
    Ok(())
}

pub fn write_profiles<W: Write>(mut out: W, rows: &[ProfileRow]) -> io::Result<()> {
    writeln!(out, "section,y,t,x,u")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.section,
            fmt_value(r.y),
            fmt_value(r.t),
            fmt_value(r.x),
            fmt_value(r.u)
        )?;
    }
    Ok(())
}

pub fn write_config<W: Write>(out: W, config: &RunConfig) -> io::Result<()> {
    let doc = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "format": 1,
        "config": config,
    });
    serde_json::to_writer_pretty(out, &doc).map_err(io::Error::other)
}

/// Writes `H.csv`, `b.csv`, `Q.csv`, `c.csv` and `meta.json` into `dir`.
pub fn write_matrix_bundle(dir: &Path, solved: &Solved) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let p = &solved.transcription.qp.program;
    write_matrix_csv(create(&dir.join("H.csv"))?, &p.h)?;
    write_vector_csv(create(&dir.join("b.csv"))?, p.b.as_slice())?;
    write_matrix_csv(create(&dir.join("Q.csv"))?, &p.q)?;
    write_vector_csv(create(&dir.join("c.csv"))?, p.c.as_slice())?;
    let meta = json!({
        "Ny": solved.ny(),
        "Nt": solved.nt(),
        "alpha": solved.alpha(),
        "j0": fmt_value(p.j0),
        "rows": p.h.nrows(),
        "cols": p.h.ncols(),
        "layout": "Z = [phi; u], each block indexed i + j*(Ny+2), i = Ny+1 is y = 0",
        "objective": "Z^T Q Z + c^T Z + j0",
    });
    serde_json::to_writer_pretty(create(&dir.join("meta.json"))?, &meta).map_err(io::Error::other)
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

/// Writes every per-cell artifact for a solved instance and returns the paths.
pub fn write_cell_artifacts(
    dir: &Path,
    solved: &Solved,
    profiles: Option<&[ProfileRow]>,
    dump: bool,
) -> io::Result<Vec<PathBuf>> {
    let stem = cell_stem(solved.ny(), solved.nt(), solved.alpha());
    let mut written = Vec::new();
    let path = dir.join(format!("solution_{stem}.csv"));
    write_solution(create(&path)?, solved)?;
    written.push(path);
    if let Some(rows) = profiles {
        let path = dir.join(format!("profiles_{stem}.csv"));
        write_profiles(create(&path)?, rows)?;
        written.push(path);
    }
    if dump {
        let path = dir.join(format!("matrices_{stem}"));
        write_matrix_bundle(&path, solved)?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_run_files(dir: &Path, config: &RunConfig, rows: &[SweepRow]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    write_report(create(&dir.join("report.csv"))?, rows)?;
    write_config(create(&dir.join("config.json"))?, config)
}
