//! Comma-separated tables with unit-bearing headers, plus a whitespace
//! separated `.dat` companion holding the plottable x/y series.
//!
//! Floats are written with `{:.9e}`, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{BinnedSeries, PeakRecord, PeriodicityReport};
use crate::dynamics::DepositionHistogram;
use crate::error::Result;
use crate::mixture::ComponentRun;
use crate::potential::{ExtremumKind, ExtremumRecord, PotentialSamples};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Float(v) => write!(out, "{v:.9e}").unwrap(),
            Cell::Text(s) => out.push_str(s),
            Cell::Missing => out.push_str("nan"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Float)
    }
}

/// Columns named `name(unit)` and the rows under them. `plot` picks the
/// columns written to the companion file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub plot: Option<(usize, Vec<usize>)>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_dat(&self) -> Option<String> {
        let (x, ys) = self.plot.as_ref()?;
        let cols: Vec<usize> = std::iter::once(*x).chain(ys.iter().copied()).collect();
        let mut out = String::from("#");
        for &c in &cols {
            write!(out, " {}", self.columns[c]).unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            for (i, &c) in cols.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                row[c].render(&mut out);
            }
            out.push('\n');
        }
        Some(out)
    }
}

pub trait ToTable {
    fn to_table(&self) -> Table;
}

impl ToTable for DepositionHistogram {
    fn to_table(&self) -> Table {
        Table {
            columns: vec!["x(nm)".into(), "count".into()],
            rows: self
                .centers()
                .into_iter()
                .zip(&self.counts)
                .map(|(x, &c)| vec![Cell::Float(x * 1e9), Cell::Int(c as i64)])
                .collect(),
            plot: Some((0, vec![1])),
        }
    }
}

impl ToTable for BinnedSeries {
    fn to_table(&self) -> Table {
        Table {
            columns: vec!["x(nm)".into(), "count".into()],
            rows: self
                .centers()
                .into_iter()
                .zip(&self.values)
                .map(|(x, &v)| vec![Cell::Float(x * 1e9), Cell::Float(v)])
                .collect(),
            plot: Some((0, vec![1])),
        }
    }
}

impl ToTable for PotentialSamples {
    fn to_table(&self) -> Table {
        Table {
            columns: vec!["x(um)".into(), "V_ni(J)".into(), "V_in(J)".into(), "V(J)".into()],
            rows: self
                .x
                .iter()
                .zip(&self.v_ni)
                .zip(&self.v_in)
                .map(|((&x, &a), &b)| vec![Cell::Float(x * 1e6), a.into(), b.into(), (a + b).into()])
                .collect(),
            plot: Some((0, vec![1, 2, 3])),
        }
    }
}

impl ToTable for [ExtremumRecord] {
    fn to_table(&self) -> Table {
        Table {
            columns: vec!["x(um)".into(), "kind".into(), "V(J)".into(), "curvature(J/m^2)".into()],
            rows: self
                .iter()
                .map(|e| {
                    let kind = match e.kind {
                        ExtremumKind::Minimum => "min",
                        ExtremumKind::Maximum => "max",
                    };
                    vec![Cell::Float(e.x * 1e6), Cell::Text(kind.into()), e.value.into(), e.curvature.into()]
                })
                .collect(),
            plot: Some((0, vec![2])),
        }
    }
}

impl ToTable for [PeakRecord] {
    fn to_table(&self) -> Table {
        Table {
            columns: vec![
                "x(nm)".into(),
                "height(count)".into(),
                "fwhm(nm)".into(),
                "background(count)".into(),
                "contrast".into(),
            ],
            rows: self
                .iter()
                .map(|p| {
                    vec![
                        Cell::Float(p.position * 1e9),
                        p.height.into(),
                        Cell::Float(p.fwhm * 1e9),
                        p.background.into(),
                        p.contrast.into(),
                    ]
                })
                .collect(),
            plot: Some((0, vec![1, 2])),
        }
    }
}

impl ToTable for PeriodicityReport {
    fn to_table(&self) -> Table {
        Table {
            columns: vec!["dominant_period(um)".into(), "beat_length(um)".into(), "periodicity_score".into()],
            rows: vec![vec![
                self.dominant_period.map(|p| p * 1e6).into(),
                self.beat_length.map(|p| p * 1e6).into(),
                self.periodicity_score.into(),
            ]],
            plot: None,
        }
    }
}

impl ToTable for [ComponentRun] {
    fn to_table(&self) -> Table {
        Table {
            columns: vec![
                "J".into(),
                "M".into(),
                "weight".into(),
                "pop_c".into(),
                "pop_d".into(),
                "trajectories".into(),
                "seed".into(),
            ],
            rows: self
                .iter()
                .map(|c| {
                    vec![
                        Cell::Int(c.j as i64),
                        Cell::Int(c.m as i64),
                        c.weight.into(),
                        c.population_c.into(),
                        c.population_d.into(),
                        Cell::Int(c.trajectories as i64),
                        Cell::Text(c.seed.to_string()),
                    ]
                })
                .collect(),
            plot: None,
        }
    }
}

/// Paths written by [`export_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct Exported {
    pub table: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Write `object` to `destination` and, for series, its `.dat` companion.
pub fn export_table<T: ToTable + ?Sized>(object: &T, destination: &Path) -> Result<Exported> {
    let table = object.to_table();
    fs::write(destination, table.to_csv())?;
    let plot = match table.to_dat() {
        Some(dat) => {
            let path = destination.with_extension("dat");
            fs::write(&path, dat)?;
            Some(path)
        }
        None => None,
    };
    Ok(Exported {
        table: destination.to_path_buf(),
        plot,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_rows_and_header() {
        let h = DepositionHistogram::from_positions(&[0.5e-9, 2.0e-9, 3.5e-9], 1.5e-9).unwrap();
        let csv = h.to_table().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "x(nm),count");
        assert_eq!(lines[1], "7.500000000e-1,1");
    }

    #[test]
    fn potential_schema() {
        let s = PotentialSamples {
            x: vec![0.0, 1e-7],
            v_ni: vec![-1.0, -2.0],
            v_in: vec![0.5, 0.25],
        };
        let t = s.to_table();
        assert_eq!(t.columns, ["x(um)", "V_ni(J)", "V_in(J)", "V(J)"]);
        assert_eq!(t.rows[1][3], Cell::Float(-1.75));
        assert!(t.to_dat().unwrap().starts_with("# x(um) V_ni(J) V_in(J) V(J)\n"));
    }

    #[test]
    fn reexport_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let h = DepositionHistogram::from_positions(&[1e-9, -4e-9, 7.7e-9, 7.9e-9], 1.403e-9).unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let ea = export_table(&h, &a).unwrap();
        export_table(&h, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(ea.plot.unwrap(), dir.path().join("a.dat"));
    }

    #[test]
    fn report_has_missing_cells_and_no_plot() {
        let r = PeriodicityReport {
            dominant_period: None,
            beat_length: Some(4.28e-6),
            periodicity_score: 0.0,
        };
        let t = r.to_table();
        assert!(t.to_csv().ends_with("nan,4.280000000e0,0.000000000e0\n"));
        assert!(t.to_dat().is_none());
    }

    #[test]
    fn unwritable_destination_errors() {
        let h = DepositionHistogram::from_positions(&[0.0], 1e-9).unwrap();
        assert!(export_table(&h, Path::new("/nonexistent/dir/h.csv")).is_err());
    }
}
