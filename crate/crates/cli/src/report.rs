//! `report`: plain-text rendering of the CSVs written by `analyze`.

use std::fmt::Write as _;
use std::path::Path;

use phaselock::Paradigm;

use crate::analyze::output_files;
use crate::error::CliError;

fn read_rows(path: &Path) -> Result<Vec<Vec<String>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    reader
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_string).collect())
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
        })
        .collect()
}

fn render_table(out: &mut String, rows: &[Vec<String>], flags: Option<&[bool]>) {
    let n_cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..n_cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    for (i, row) in rows.iter().enumerate() {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                line.push_str("  ");
            }
            let pad = widths[c] - cell.chars().count();
            if c == 0 {
                line.push_str(cell);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str(&" ".repeat(pad));
                line.push_str(cell);
            }
        }
        if flags.and_then(|f| f.get(i)).copied().unwrap_or(false) {
            line.push_str("  *");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn corrupt(path: &Path, what: &str) -> CliError {
    CliError::Data(format!("{}: {what}", path.display()))
}

/// Renders every paradigm whose two analysis files exist in `dir`. Rows
/// with p below the analysis significance level carry a `*`.
pub fn cmd_report(dir: &Path) -> Result<String, CliError> {
    let mut present = Vec::new();
    let mut partial = Vec::new();
    for paradigm in Paradigm::ALL {
        let files = output_files(paradigm);
        let exists: Vec<bool> = files.iter().map(|f| dir.join(f).is_file()).collect();
        match (exists[0], exists[1]) {
            (true, true) => present.push(paradigm),
            (false, false) => {}
            _ => partial.extend(files.iter().zip(&exists).filter(|(_, e)| !**e).map(|(f, _)| f.clone())),
        }
    }
    if !partial.is_empty() {
        return Err(CliError::Data(format!(
            "{}: incomplete analysis output, missing {}",
            dir.display(),
            partial.join(", ")
        )));
    }
    if present.is_empty() {
        let expected: Vec<String> = Paradigm::ALL.iter().flat_map(|p| output_files(*p)).collect();
        return Err(CliError::Data(format!(
            "{}: no analysis output found; expected {}",
            dir.display(),
            expected.join(", ")
        )));
    }

    let mut out = String::new();
    for paradigm in present {
        let [class_file, report_file] = output_files(paradigm);
        let class_path = dir.join(&class_file);
        let class_rows = read_rows(&class_path)?;
        if class_rows.len() < 3 || class_rows[0].first().map(String::as_str) != Some("subject") {
            return Err(corrupt(&class_path, "not a class table"));
        }
        let report_path = dir.join(&report_file);
        let report_rows = read_rows(&report_path)?;
        if report_rows.len() != 16 || report_rows[0].len() != 7 || report_rows[0][0] != "pair" {
            return Err(corrupt(&report_path, "expected a header and 15 region pairs"));
        }
        let mut flags = vec![false];
        for row in &report_rows[1..] {
            match row.get(6).map(String::as_str) {
                Some("yes") => flags.push(true),
                Some("no") => flags.push(false),
                _ => return Err(corrupt(&report_path, "bad `significant` column")),
            }
        }
        let table: Vec<Vec<String>> = report_rows.iter().map(|r| r[..6].to_vec()).collect();

        let _ = writeln!(out, "== {} ({}) ==", paradigm, paradigm.code());
        let _ = writeln!(out, "\nAll-pair PLV per class ({class_file})");
        render_table(&mut out, &class_rows, None);
        let _ = writeln!(out, "\nTask versus rest by region pair ({report_file})");
        render_table(&mut out, &table, Some(&flags));
        let significant = flags.iter().filter(|f| **f).count();
        let _ = writeln!(out, "* p below the significance level ({significant} of 15 pairs)\n");
    }
    Ok(out)
}
