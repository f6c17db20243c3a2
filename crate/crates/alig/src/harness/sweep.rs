//! Grid sweeps: the Cartesian product of per-key value lists, each cell an
//! independent seeded run in its own output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::optimizer::RunSummary;

use super::config::RawConfig;
use super::run::run;

/// Metric used to order sweep result rows. Accuracy sorts descending,
/// losses ascending; failed cells always sort last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortMetric {
    FinalFullLoss,
    BestFullLoss,
    FinalAccuracy,
}

#[derive(Debug)]
pub enum CellOutcome {
    Completed(RunSummary),
    Failed(String),
}

#[derive(Debug)]
pub struct SweepCell {
    pub index: usize,
    /// The grid assignments of this cell, in grid-key order.
    pub overrides: Vec<(String, String)>,
    pub out_dir: PathBuf,
    pub outcome: CellOutcome,
}

pub struct SweepTable {
    pub grid_keys: Vec<String>,
    pub cells: Vec<SweepCell>,
}

/// Every combination of grid values, in row-major order over the grid's
/// key order. An empty grid yields the single base cell.
fn cartesian_product(grid: &[(String, Vec<String>)]) -> Vec<Vec<(String, String)>> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in grid {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for value in values {
                let mut extended = combo.clone();
                extended.push((key.clone(), value.clone()));
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
}

/// Run every cell (up to `parallelism` at a time), then write `table.csv`
/// and `table.txt` under `out_root`.
pub fn sweep(
    base: &RawConfig,
    grid: &[(String, Vec<String>)],
    parallelism: usize,
    out_root: &Path,
    sort_by: SortMetric,
) -> Result<SweepTable> {
    if parallelism == 0 {
        return Err(Error::InvalidArgument("parallelism must be positive".into()));
    }
    let combos = cartesian_product(grid);
    fs::create_dir_all(out_root)?;

    let slots: Mutex<Vec<Option<SweepCell>>> =
        Mutex::new((0..combos.len()).map(|_| None).collect());
    let next_cell = AtomicUsize::new(0);
    let workers = parallelism.min(combos.len()).max(1);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next_cell.fetch_add(1, Ordering::SeqCst);
                if index >= combos.len() {
                    break;
                }
                let cell = run_cell(base, index, &combos[index], out_root);
                slots.lock().unwrap()[index] = Some(cell);
            });
        }
    });

    let mut cells: Vec<SweepCell> = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|c| c.expect("every cell executed"))
        .collect();
    sort_cells(&mut cells, sort_by);

    let grid_keys: Vec<String> = grid.iter().map(|(k, _)| k.clone()).collect();
    let table = SweepTable { grid_keys, cells };
    write_table_csv(&table, &out_root.join("table.csv"))?;
    write_table_txt(&table, &out_root.join("table.txt"))?;
    Ok(table)
}

fn run_cell(
    base: &RawConfig,
    index: usize,
    combo: &[(String, String)],
    out_root: &Path,
) -> SweepCell {
    let out_dir = out_root.join(format!("cell_{index:03}"));
    let mut overrides = combo.to_vec();
    overrides.push(("out_dir".to_string(), out_dir.display().to_string()));
    let outcome = match base.with_overrides(&overrides).and_then(|raw| raw.build()) {
        Ok(config) => match run(&config) {
            Ok(summary) => CellOutcome::Completed(summary),
            Err(e) => CellOutcome::Failed(e.to_string()),
        },
        Err(e) => CellOutcome::Failed(e.to_string()),
    };
    SweepCell {
        index,
        overrides: combo.to_vec(),
        out_dir,
        outcome,
    }
}

fn sort_cells(cells: &mut [SweepCell], sort_by: SortMetric) {
    cells.sort_by(|a, b| {
        let key = |cell: &SweepCell| match &cell.outcome {
            CellOutcome::Completed(s) => match sort_by {
                SortMetric::FinalFullLoss => s.final_full_loss,
                SortMetric::BestFullLoss => s.best_full_loss,
                // descending: higher accuracy first
                SortMetric::FinalAccuracy => -s.final_accuracy.unwrap_or(f64::NEG_INFINITY),
            },
            CellOutcome::Failed(_) => f64::INFINITY,
        };
        key(a)
            .partial_cmp(&key(b))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.index.cmp(&b.index))
    });
}

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn cell_fields(table: &SweepTable, cell: &SweepCell) -> Vec<String> {
    let mut fields = vec![cell.index.to_string()];
    for key in &table.grid_keys {
        let value = cell
            .overrides
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .unwrap_or_default();
        fields.push(value);
    }
    match &cell.outcome {
        CellOutcome::Completed(s) => {
            fields.push("ok".into());
            fields.push(s.final_full_loss.to_string());
            fields.push(s.best_full_loss.to_string());
            fields.push(fmt_opt(s.final_accuracy));
            fields.push(s.steps_taken.to_string());
            fields.push(String::new());
        }
        CellOutcome::Failed(reason) => {
            fields.push("failed".into());
            fields.extend([String::new(), String::new(), String::new(), String::new()]);
            fields.push(reason.replace(',', ";"));
        }
    }
    fields
}

fn header_fields(table: &SweepTable) -> Vec<String> {
    let mut header = vec!["cell".to_string()];
    header.extend(table.grid_keys.iter().cloned());
    header.extend(
        ["status", "final_full_loss", "best_full_loss", "final_accuracy", "steps", "error"]
            .map(String::from),
    );
    header
}

fn write_table_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header_fields(table).join(","))?;
    for cell in &table.cells {
        writeln!(out, "{}", cell_fields(table, cell).join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Fixed-width text rendering of the same rows.
fn write_table_txt(table: &SweepTable, path: &Path) -> Result<()> {
    let header = header_fields(table);
    let rows: Vec<Vec<String>> = table
        .cells
        .iter()
        .map(|cell| cell_fields(table, cell))
        .collect();
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &rows {
        for (i, field) in row.iter().enumerate() {
            widths[i] = widths[i].max(field.len());
        }
    }
    let render = |fields: &[String]| {
        fields
            .iter()
            .enumerate()
            .map(|(i, f)| format!("{:<width$}", f, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", render(&header))?;
    writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)))?;
    for row in &rows {
        writeln!(out, "{}", render(row))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config(dir: &Path) -> RawConfig {
        RawConfig::parse(&format!(
            "problem.kind = interp_least_squares\nproblem.n = 4\nproblem.p = 6\n\
             rule.variant = alig\nrule.eta = 1.0\nmomentum.mu = 0\n\
             region.variant = unconstrained\nepochs = 2\nout_dir = {}\n",
            dir.display()
        ))
        .unwrap()
    }

    #[test]
    fn empty_grid_runs_the_base_config_once() {
        let dir = tempfile::tempdir().unwrap();
        let base = base_config(dir.path());
        let table = sweep(&base, &[], 1, dir.path(), SortMetric::FinalFullLoss).unwrap();
        assert_eq!(table.cells.len(), 1);
        assert!(matches!(table.cells[0].outcome, CellOutcome::Completed(_)));
        assert!(dir.path().join("table.csv").exists());
        assert!(dir.path().join("table.txt").exists());
    }

    #[test]
    fn grid_produces_the_cartesian_product() {
        let dir = tempfile::tempdir().unwrap();
        let base = base_config(dir.path());
        let grid = vec![
            ("momentum.mu".to_string(), vec!["0".to_string(), "0.9".to_string()]),
            ("seed".to_string(), vec!["0".to_string(), "1".to_string(), "2".to_string()]),
        ];
        let table = sweep(&base, &grid, 2, dir.path(), SortMetric::FinalFullLoss).unwrap();
        assert_eq!(table.cells.len(), 6);
        assert!(table
            .cells
            .iter()
            .all(|c| matches!(c.outcome, CellOutcome::Completed(_))));
        // every cell directory has its own trace
        for cell in &table.cells {
            assert!(cell.out_dir.join("trace.csv").exists());
        }
    }

    #[test]
    fn invalid_cells_fail_in_isolation() {
        let dir = tempfile::tempdir().unwrap();
        let base = base_config(dir.path());
        let grid = vec![(
            "rule.eta".to_string(),
            vec!["0.5".to_string(), "-1".to_string()],
        )];
        let table = sweep(&base, &grid, 1, dir.path(), SortMetric::FinalFullLoss).unwrap();
        let ok = table
            .cells
            .iter()
            .filter(|c| matches!(c.outcome, CellOutcome::Completed(_)))
            .count();
        let failed: Vec<_> = table
            .cells
            .iter()
            .filter_map(|c| match &c.outcome {
                CellOutcome::Failed(reason) => Some(reason.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(ok, 1);
        assert_eq!(failed.len(), 1);
        assert!(failed[0].contains("rule.eta"), "{}", failed[0]);
    }

    #[test]
    fn failed_cells_sort_last() {
        let mut cells = vec![
            SweepCell {
                index: 0,
                overrides: vec![],
                out_dir: PathBuf::new(),
                outcome: CellOutcome::Failed("x".into()),
            },
            SweepCell {
                index: 1,
                overrides: vec![],
                out_dir: PathBuf::new(),
                outcome: CellOutcome::Completed(RunSummary {
                    final_full_loss: 2.0,
                    best_full_loss: 1.0,
                    final_accuracy: None,
                    steps_taken: 1,
                    interpolation_residual_final: 0.0,
                    wall_time_s: 0.0,
                }),
            },
        ];
        sort_cells(&mut cells, SortMetric::FinalFullLoss);
        assert_eq!(cells[0].index, 1);
    }
}
