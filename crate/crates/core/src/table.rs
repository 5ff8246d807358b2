//! Results table: one column per subject, grouped by environment, rows
//! Min/Avg/Median/Max/Stddev in µs. A CSV export with one row per subject
//! accompanies the text table.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::stats::BenchStats;

#[derive(Debug, Clone, PartialEq)]
pub struct TableColumn {
    pub environment: String,
    pub subject: String,
    /// `None` when the subject produced no data; the column is then omitted.
    pub stats: Option<BenchStats>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub text: String,
    pub csv: String,
}

pub const CSV_HEADER: &str =
    "environment,subject,count,settled,failed,min_us,avg_us,median_us,max_us,stddev_us";

const ROWS: [&str; 5] = ["Min", "Avg", "Median", "Max", "Stddev"];

fn row_value(stats: &BenchStats, row: usize) -> f64 {
    match row {
        0 => stats.min_us,
        1 => stats.avg_us,
        2 => stats.median_us,
        3 => stats.max_us,
        _ => stats.stddev_us,
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Lays out `columns` in first-appearance order of their environments.
pub fn emit_table(columns: &[TableColumn]) -> Table {
    let mut environments: Vec<&str> = Vec::new();
    for c in columns {
        if !environments.contains(&c.environment.as_str()) {
            environments.push(&c.environment);
        }
    }

    struct Group<'a> {
        name: &'a str,
        cols: Vec<(&'a str, &'a BenchStats, [String; 5])>,
    }
    let mut groups = Vec::new();
    let mut footer = Vec::new();
    for env in &environments {
        let mut cols = Vec::new();
        for c in columns.iter().filter(|c| c.environment == *env) {
            match &c.stats {
                Some(s) => {
                    let cells = core::array::from_fn(|r| format!("{:.0}", row_value(s, r)));
                    cols.push((c.subject.as_str(), s, cells));
                }
                None => footer.push(format!("no data for {} / {}", env, c.subject)),
            }
        }
        if cols.is_empty() {
            footer.push(format!("environment `{env}` omitted: no data"));
        } else {
            groups.push(Group { name: env, cols });
        }
    }

    let label_width = 7;
    let widths: Vec<Vec<usize>> = groups
        .iter()
        .map(|g| {
            g.cols
                .iter()
                .map(|(subject, _, cells)| {
                    cells.iter().map(String::len).max().unwrap_or(0).max(subject.len())
                })
                .collect()
        })
        .collect();
    let group_width = |gi: usize| -> usize {
        let inner: usize = widths[gi].iter().sum::<usize>() + 2 * (widths[gi].len() - 1);
        inner.max(groups[gi].name.chars().count())
    };

    let mut text = String::new();
    let _ = write!(text, "{:<label_width$}", "[µs]");
    for (gi, g) in groups.iter().enumerate() {
        let w = group_width(gi);
        let _ = write!(text, " | {:<w$}", g.name);
    }
    text.push('\n');
    let _ = write!(text, "{:<label_width$}", "");
    for (gi, g) in groups.iter().enumerate() {
        let mut cell = String::new();
        for (ci, (subject, _, _)) in g.cols.iter().enumerate() {
            if ci > 0 {
                cell.push_str("  ");
            }
            let w = widths[gi][ci];
            let _ = write!(cell, "{subject:>w$}");
        }
        let w = group_width(gi);
        let _ = write!(text, " | {cell:>w$}");
    }
    text.push('\n');
    let rule_len = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
    text.push_str(&"-".repeat(rule_len));
    text.push('\n');
    for (r, label) in ROWS.iter().enumerate() {
        let _ = write!(text, "{label:<label_width$}");
        for (gi, g) in groups.iter().enumerate() {
            let mut cell = String::new();
            for (ci, (_, _, cells)) in g.cols.iter().enumerate() {
                if ci > 0 {
                    cell.push_str("  ");
                }
                let w = widths[gi][ci];
                let _ = write!(cell, "{:>w$}", cells[r]);
            }
            let w = group_width(gi);
            let _ = write!(text, " | {cell:>w$}");
        }
        text.push('\n');
    }
    for note in &footer {
        let _ = writeln!(text, "note: {note}");
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for g in &groups {
        for (subject, s, _) in &g.cols {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{:.3},{:.3},{:.3},{:.3},{:.3}",
                csv_field(g.name),
                csv_field(subject),
                s.count,
                s.settled,
                s.failed,
                s.min_us,
                s.avg_us,
                s.median_us,
                s.max_us,
                s.stddev_us
            );
        }
    }
    Table { text, csv }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(min: f64, avg: f64, median: f64, max: f64, sd: f64) -> BenchStats {
        BenchStats {
            count: 3500,
            settled: 1500,
            failed: 0,
            min_us: min,
            avg_us: avg,
            median_us: median,
            max_us: max,
            stddev_us: sd,
        }
    }

    fn row<'a>(text: &'a str, label: &str) -> Vec<&'a str> {
        text.lines()
            .find(|l| l.starts_with(label))
            .map(|l| l.split_whitespace().filter(|t| *t != "|").collect())
            .unwrap_or_default()
    }

    #[test]
    fn single_subject_min_row() {
        let t = emit_table(&[TableColumn {
            environment: "local".into(),
            subject: "emu".into(),
            stats: Some(stats(100.0, 300.0, 300.0, 500.0, 158.11)),
        }]);
        assert_eq!(row(&t.text, "Min"), ["Min", "100"]);
        assert_eq!(row(&t.text, "Stddev"), ["Stddev", "158"]);
        assert_eq!(t.csv.lines().count(), 2);
    }

    #[test]
    fn manual_local_column() {
        let t = emit_table(&[TableColumn {
            environment: "local, no network".into(),
            subject: "manual".into(),
            stats: Some(stats(632.0, 1290.0, 1275.0, 5551.0, 139.0)),
        }]);
        assert_eq!(row(&t.text, "Min"), ["Min", "632"]);
        assert_eq!(row(&t.text, "Avg"), ["Avg", "1290"]);
        assert_eq!(row(&t.text, "Median"), ["Median", "1275"]);
        assert_eq!(row(&t.text, "Max"), ["Max", "5551"]);
        assert_eq!(row(&t.text, "Stddev"), ["Stddev", "139"]);
        assert!(t.csv.contains("\"local, no network\",manual,3500,1500,0,632.000"));
    }

    #[test]
    fn empty_environment_omitted_with_footer() {
        let t = emit_table(&[
            TableColumn {
                environment: "local".into(),
                subject: "a".into(),
                stats: Some(stats(1.0, 2.0, 2.0, 3.0, 1.0)),
            },
            TableColumn {
                environment: "devices".into(),
                subject: "eem".into(),
                stats: None,
            },
        ]);
        assert!(!t.text.lines().next().unwrap().contains("devices"));
        assert!(t.text.contains("note: environment `devices` omitted: no data"));
        assert_eq!(row(&t.text, "Min"), ["Min", "1"]);
    }

    #[test]
    fn multiple_subjects_share_group() {
        let t = emit_table(&[
            TableColumn {
                environment: "devices, network".into(),
                subject: "EEM".into(),
                stats: Some(stats(6023.0, 13233.0, 12453.0, 66610.0, 6586.0)),
            },
            TableColumn {
                environment: "devices, network".into(),
                subject: "Sentron".into(),
                stats: Some(stats(2653.0, 6760.0, 4336.0, 30219.0, 5842.0)),
            },
        ]);
        assert_eq!(row(&t.text, "Max"), ["Max", "66610", "30219"]);
        assert_eq!(t.text.lines().next().unwrap().matches('|').count(), 1);
    }
}
