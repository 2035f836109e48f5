//! Trajectory CSV and metadata files.
//!
//! The CSV carries one row per partition node:
//!
//! ```text
//! t,x_1..x_n,y_1..y_n,u_1..u_nu,v_1..v_nv,u_tilde_1..,v_tilde_1..,dev
//! ```
//!
//! Controls are piecewise constant per cell; the final row repeats the last
//! cell's controls so every row has the full column set. All numbers are
//! printed with 12 significant digits, locale-independent, so identical
//! runs produce byte-identical files.

use fracguide::{SimulationResult, TimeGrid, Trajectory};
use std::fmt::Write as _;
use std::fs;
use std::io::{self};
use std::path::Path;

pub const META_HEADER: &str = "fracguide-meta v1";

/// 12 significant digits, scientific, locale-independent.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.11e}")
}

fn push_row(out: &mut String, cells: &[f64]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{}", fmt_num(*c));
    }
    out.push('\n');
}

/// Render the trajectory CSV for a finished run.
pub fn render_trajectory_csv(result: &SimulationResult) -> String {
    let n_state = result.x_traj.dim();
    let n_u = result.u_real.values()[0].len();
    let n_v = result.v_real.values()[0].len();
    let nodes = result.x_traj.node_count();

    let mut header: Vec<String> = vec!["t".into()];
    let cols = [
        ("x", n_state),
        ("y", n_state),
        ("u", n_u),
        ("v", n_v),
        ("u_tilde", n_u),
        ("v_tilde", n_v),
    ];
    for (name, count) in cols {
        for i in 1..=count {
            header.push(format!("{name}_{i}"));
        }
    }
    header.push("dev".into());

    let mut out = String::with_capacity(nodes * header.len() * 20);
    out.push_str(&header.join(","));
    out.push('\n');

    let mut cells: Vec<f64> = Vec::with_capacity(header.len());
    for m in 0..nodes {
        cells.clear();
        // Controls on the cell starting at this node; last row repeats the
        // final cell.
        let cell = m.min(nodes - 2);
        cells.push(result.x_traj.grid().t(m));
        cells.extend_from_slice(result.x_traj.value(m));
        cells.extend_from_slice(result.y_traj.value(m));
        cells.extend_from_slice(&result.u_real.values()[cell]);
        cells.extend_from_slice(&result.v_real.values()[cell]);
        cells.extend_from_slice(&result.u_tilde_real.values()[cell]);
        cells.extend_from_slice(&result.v_tilde_real.values()[cell]);
        cells.push(result.deviation_at(m));
        push_row(&mut out, &cells);
    }
    out
}

/// Render the flat key-value metadata summary.
pub fn render_metadata(entries: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(META_HEADER);
    out.push('\n');
    for (k, v) in entries {
        let _ = writeln!(out, "{k} = {v}");
    }
    out
}

/// A stored run reloaded from its CSV (time grid plus the system and guide
/// trajectories; the control columns are not needed for re-verification).
pub struct StoredRun {
    pub x_traj: Trajectory,
    pub y_traj: Trajectory,
    /// The dev column as stored, for cross-checking.
    pub dev: Vec<f64>,
}

/// Parse a trajectory CSV produced by [`render_trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<StoredRun, String> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or("empty csv")?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"t") || columns.last() != Some(&"dev") {
        return Err("csv header must start with 't' and end with 'dev'".into());
    }
    let n_state = columns.iter().filter(|c| c.starts_with("x_")).count();
    let n_guide = columns.iter().filter(|c| c.starts_with("y_")).count();
    if n_state == 0 || n_state != n_guide {
        return Err(format!(
            "csv must carry matching x_*/y_* columns, found {n_state} and {n_guide}"
        ));
    }
    let mut times = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dev = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(format!(
                "csv line {}: expected {} cells, found {}",
                idx + 1,
                columns.len(),
                cells.len()
            ));
        }
        let parse = |cell: &str| -> Result<f64, String> {
            cell.parse::<f64>()
                .map_err(|_| format!("csv line {}: malformed number '{cell}'", idx + 1))
        };
        times.push(parse(cells[0])?);
        for c in &cells[1..1 + n_state] {
            xs.push(parse(c)?);
        }
        for c in &cells[1 + n_state..1 + 2 * n_state] {
            ys.push(parse(c)?);
        }
        dev.push(parse(cells[cells.len() - 1])?);
    }
    let grid = TimeGrid::from_nodes(times).map_err(|e| e.to_string())?;
    let x_traj = Trajectory::new(grid.clone(), n_state, xs).map_err(|e| e.to_string())?;
    let y_traj = Trajectory::new(grid, n_state, ys).map_err(|e| e.to_string())?;
    Ok(StoredRun {
        x_traj,
        y_traj,
        dev,
    })
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracguide::{paper_example, run_aiming, TimeGrid};

    fn small_result() -> SimulationResult {
        let mut config = paper_example();
        config.partition = TimeGrid::uniform(5.0, 20).unwrap();
        run_aiming(&config).unwrap()
    }

    #[test]
    fn csv_shape_and_roundtrip() {
        let result = small_result();
        let text = render_trajectory_csv(&result);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 21);
        assert!(lines[0].starts_with("t,x_1,x_2,y_1,y_2,u_1,u_2,v_1,v_2,"));
        assert!(lines[0].ends_with("v_tilde_2,dev"));

        let stored = parse_trajectory_csv(&text).unwrap();
        assert_eq!(stored.x_traj.node_count(), 21);
        assert_eq!(stored.x_traj.dim(), 2);
        // Stored samples agree with the run to print precision.
        for m in 0..21 {
            for d in 0..2 {
                let a = stored.x_traj.value(m)[d];
                let b = result.x_traj.value(m)[d];
                assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn dev_column_matches_recomputation() {
        let result = small_result();
        let stored = parse_trajectory_csv(&render_trajectory_csv(&result)).unwrap();
        for m in 0..stored.x_traj.node_count() {
            let recomputed: f64 = stored
                .x_traj
                .value(m)
                .iter()
                .zip(stored.y_traj.value(m))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(
                (recomputed - stored.dev[m]).abs() <= 1e-9,
                "node {m}: dev column {} vs recomputed {recomputed}",
                stored.dev[m]
            );
        }
    }

    #[test]
    fn formatting_is_twelve_significant_digits() {
        assert_eq!(fmt_num(0.0005), "5.00000000000e-4");
        assert_eq!(fmt_num(-1.0), "-1.00000000000e0");
        assert_eq!(fmt_num(31150.126656184989), "3.11501266562e4");
    }

    #[test]
    fn metadata_rendering() {
        let text = render_metadata(&[
            ("seed".into(), "42".into()),
            ("deviation_sup".into(), fmt_num(0.25)),
        ]);
        assert!(text.starts_with(META_HEADER));
        assert!(text.contains("seed = 42"));
        assert!(text.contains("deviation_sup = 2.50000000000e-1"));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(parse_trajectory_csv("").is_err());
        assert!(parse_trajectory_csv("a,b,c\n").is_err());
        // Malformed number.
        assert!(parse_trajectory_csv("t,x_1,y_1,dev\n0.0,bad,1.0,1.0\n").is_err());
        // Wrong cell count.
        assert!(parse_trajectory_csv("t,x_1,y_1,dev\n0.0,1.0\n").is_err());
        // Mismatched x/y column counts.
        assert!(parse_trajectory_csv("t,x_1,x_2,y_1,dev\n").is_err());
    }
}
