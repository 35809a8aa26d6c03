//! CSV ingestion and export.
//!
//! All tabular inputs share one convention: a header row, column 1 holds
//! ISO-8601 dates (`YYYY-MM-DD`), rows are date-sorted, and a blank cell means
//! the column has no observation on that date. Errors carry the file path and
//! 1-based line number of the offending row.

use std::path::Path;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::sentiment::{BondRecord, BondSnapshot, OptionVolume};
use crate::series::ObservationSeries;

/// One value column lifted out of a CSV table.
#[derive(Debug, Clone)]
pub struct NamedSeries {
    pub name: String,
    pub series: ObservationSeries,
}

/// All value columns of a CSV table, in file order.
#[derive(Debug, Clone)]
pub struct SeriesTable {
    pub columns: Vec<NamedSeries>,
}

impl SeriesTable {
    pub fn column(&self, name: &str) -> Option<&ObservationSeries> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.series)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }
}

fn table_err(path: &Path, row: usize, problem: impl Into<String>) -> Error {
    Error::Table {
        path: path.display().to_string(),
        row,
        problem: problem.into(),
    }
}

fn parse_date(path: &Path, row: usize, field: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field.trim(), "%Y-%m-%d")
        .map_err(|_| table_err(path, row, format!("unparseable date '{}'", field.trim())))
}

fn parse_value(path: &Path, row: usize, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| table_err(path, row, format!("column '{column}': unparseable value '{}'", field.trim())))?;
    if !v.is_finite() {
        return Err(table_err(path, row, format!("column '{column}': non-finite value")));
    }
    Ok(v)
}

/// Reads a date-indexed table: every non-date column becomes one series whose
/// dates are the rows where its cell is non-blank.
pub fn read_series_table(path: &Path) -> Result<SeriesTable> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(table_err(path, 1, "table needs a date column and at least one value column"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(|h| h.trim().to_string()).collect();
    for (i, name) in names.iter().enumerate() {
        if names[..i].contains(name) {
            return Err(table_err(path, 1, format!("duplicate column name '{name}'")));
        }
    }

    let mut dates_per_col: Vec<Vec<NaiveDate>> = vec![Vec::new(); names.len()];
    let mut values_per_col: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut previous: Option<NaiveDate> = None;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2; // 1-based line number; header is line 1
        let record = record?;
        let date = parse_date(path, row, record.get(0).unwrap_or(""))?;
        if previous.is_some_and(|p| date <= p) {
            return Err(table_err(path, row, format!("rows not date-sorted at {date}")));
        }
        previous = Some(date);
        for (c, name) in names.iter().enumerate() {
            let field = record.get(c + 1).unwrap_or("");
            if field.trim().is_empty() {
                continue; // missing observation for this column
            }
            dates_per_col[c].push(date);
            values_per_col[c].push(parse_value(path, row, name, field)?);
        }
    }

    let columns = names
        .into_iter()
        .zip(dates_per_col.into_iter().zip(values_per_col))
        .map(|(name, (dates, values))| {
            let series = ObservationSeries::new(dates, values, name.clone())?;
            Ok(NamedSeries { name, series })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SeriesTable { columns })
}

/// Renders series as one table over the union of their dates; a column is
/// blank on dates it lacks. Values use Rust's shortest round-trip float
/// formatting, so reading the table back reproduces them bit for bit.
pub fn render_series_table(columns: &[(&str, &ObservationSeries)]) -> String {
    let mut dates: Vec<NaiveDate> = columns
        .iter()
        .flat_map(|(_, s)| s.dates().iter().copied())
        .collect();
    dates.sort_unstable();
    dates.dedup();

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["date".to_string()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    writer.write_record(&header).expect("write to Vec");

    // Per-column cursors; series dates are sorted, so one forward pass suffices.
    let mut cursors = vec![0usize; columns.len()];
    for date in &dates {
        let mut record = vec![date.format("%Y-%m-%d").to_string()];
        for (c, (_, series)) in columns.iter().enumerate() {
            let i = &mut cursors[c];
            if *i < series.len() && series.dates()[*i] == *date {
                record.push(format!("{}", series.values()[*i]));
                *i += 1;
            } else {
                record.push(String::new());
            }
        }
        writer.write_record(&record).expect("write to Vec");
    }
    let bytes = writer.into_inner().expect("flush to Vec");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// Writes [`render_series_table`] output to `path`.
pub fn write_series_table(path: &Path, columns: &[(&str, &ObservationSeries)]) -> Result<()> {
    std::fs::write(path, render_series_table(columns))?;
    Ok(())
}

/// Reads put/call option volume rows: `date,put_volume,call_volume`.
pub fn read_option_volumes(path: &Path) -> Result<Vec<OptionVolume>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    let mut previous: Option<NaiveDate> = None;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record?;
        if record.len() < 3 {
            return Err(table_err(path, row, "expected date,put_volume,call_volume"));
        }
        let date = parse_date(path, row, record.get(0).unwrap())?;
        if previous.is_some_and(|p| date <= p) {
            return Err(table_err(path, row, format!("rows not date-sorted at {date}")));
        }
        previous = Some(date);
        out.push(OptionVolume {
            date,
            put_volume: parse_value(path, row, "put_volume", record.get(1).unwrap())?,
            call_volume: parse_value(path, row, "call_volume", record.get(2).unwrap())?,
        });
    }
    Ok(out)
}

/// Reads bond cross-sections: `date,bond_id,market_value,ytm_percent`, one row
/// per bond per date, rows grouped by date in ascending order.
pub fn read_bond_snapshots(path: &Path) -> Result<Vec<BondSnapshot>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut snapshots: Vec<BondSnapshot> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 2;
        let record = record?;
        if record.len() < 4 {
            return Err(table_err(path, row, "expected date,bond_id,market_value,ytm_percent"));
        }
        let date = parse_date(path, row, record.get(0).unwrap())?;
        let bond = BondRecord {
            bond_id: record.get(1).unwrap().trim().to_string(),
            market_value: parse_value(path, row, "market_value", record.get(2).unwrap())?,
            ytm_percent: parse_value(path, row, "ytm_percent", record.get(3).unwrap())?,
        };
        if bond.bond_id.is_empty() {
            return Err(table_err(path, row, "empty bond_id"));
        }
        match snapshots.last_mut() {
            Some(last) if last.date == date => last.bonds.push(bond),
            Some(last) if last.date > date => {
                return Err(table_err(path, row, format!("rows not date-sorted at {date}")));
            }
            _ => snapshots.push(BondSnapshot {
                date,
                bonds: vec![bond],
            }),
        }
    }
    Ok(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_columns_with_blank_cells_as_missing() {
        let f = write_temp(
            "date,close,vol\n2020-01-01,100.5,\n2020-01-02,,3.25\n2020-01-03,101.0,4.5\n",
        );
        let table = read_series_table(f.path()).unwrap();
        let close = table.column("close").unwrap();
        let vol = table.column("vol").unwrap();
        assert_eq!(close.len(), 2);
        assert_eq!(close.values(), &[100.5, 101.0]);
        assert_eq!(vol.len(), 2);
        assert_eq!(vol.values(), &[3.25, 4.5]);
        assert!(table.column("nope").is_none());
    }

    #[test]
    fn rejects_unsorted_rows_with_line_number() {
        let f = write_temp("date,x\n2020-01-02,1\n2020-01-01,2\n");
        let err = read_series_table(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "{msg}");
        assert!(msg.contains("date-sorted"), "{msg}");
    }

    #[test]
    fn rejects_unparseable_cell_with_location() {
        let f = write_temp("date,x\n2020-01-01,abc\n");
        let msg = read_series_table(f.path()).unwrap_err().to_string();
        assert!(msg.contains(":2:") && msg.contains("'x'"), "{msg}");
    }

    #[test]
    fn rejects_bad_date() {
        let f = write_temp("date,x\n01/02/2020,1\n");
        let msg = read_series_table(f.path()).unwrap_err().to_string();
        assert!(msg.contains("unparseable date"), "{msg}");
    }

    #[test]
    fn write_then_read_round_trips_bit_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let d0 = NaiveDate::from_ymd_opt(2015, 3, 2).unwrap();
        let a = ObservationSeries::from_start_date(
            d0,
            vec![0.1, -2.5e-13, 3.333333333333333, 1.0 / 3.0],
            "a",
        )
        .unwrap();
        // b misses the middle dates.
        let b = ObservationSeries::new(
            vec![d0, d0 + chrono::Days::new(3)],
            vec![7.25, -0.875],
            "b",
        )
        .unwrap();
        write_series_table(&path, &[("a", &a), ("b", &b)]).unwrap();
        let table = read_series_table(&path).unwrap();
        assert_eq!(table.column("a").unwrap().values(), a.values());
        assert_eq!(table.column("a").unwrap().dates(), a.dates());
        assert_eq!(table.column("b").unwrap().values(), b.values());
        assert_eq!(table.column("b").unwrap().len(), 2);
    }

    #[test]
    fn reads_option_volume_rows() {
        let f = write_temp(
            "date,put_volume,call_volume\n2020-01-01,10,20\n2020-01-02,5,0\n",
        );
        let rows = read_option_volumes(f.path()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].put_volume, 10.0);
        assert_eq!(rows[1].call_volume, 0.0);
    }

    #[test]
    fn reads_bond_snapshots_grouped_by_date() {
        let f = write_temp(
            "date,bond_id,market_value,ytm_percent\n\
             2020-01-01,IL001,100,7.5\n\
             2020-01-01,IL002,50,9.0\n\
             2020-01-02,IL001,110,8.5\n",
        );
        let snaps = read_bond_snapshots(f.path()).unwrap();
        assert_eq!(snaps.len(), 2);
        assert_eq!(snaps[0].bonds.len(), 2);
        assert_eq!(snaps[0].bonds[1].bond_id, "IL002");
        assert_eq!(snaps[1].bonds[0].market_value, 110.0);
    }

    #[test]
    fn bond_snapshots_reject_backwards_dates() {
        let f = write_temp(
            "date,bond_id,market_value,ytm_percent\n\
             2020-01-02,IL001,100,7.5\n\
             2020-01-01,IL002,50,9.0\n",
        );
        let msg = read_bond_snapshots(f.path()).unwrap_err().to_string();
        assert!(msg.contains("date-sorted"), "{msg}");
    }
}
