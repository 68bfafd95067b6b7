//! Text formats for matrices, labels, score tables and curves.
//!
//! Point IDs in every file are 1-based.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datagen::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::eval::PrCurve;
use crate::matrix::DataMatrix;
use crate::report::ScoreReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    /// Comma- or whitespace-separated reals, optional non-numeric header.
    #[default]
    Delimited,
    /// Whitespace-separated integers, one instance per line.
    Arcene,
}

fn split_fields(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
}

fn parse_field(f: &str, format: MatrixFormat) -> Option<f64> {
    match format {
        MatrixFormat::Delimited => f.parse::<f64>().ok().filter(|v| v.is_finite()),
        MatrixFormat::Arcene => f.parse::<i64>().ok().map(|v| v as f64),
    }
}

pub fn parse_matrix(text: &str, format: MatrixFormat) -> Result<DataMatrix> {
    let mut values: Vec<f64> = Vec::new();
    let mut width: Option<usize> = None;
    let mut n = 0;
    let mut header_allowed = format == MatrixFormat::Delimited;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let fields: Vec<&str> = match format {
            MatrixFormat::Delimited => split_fields(line).collect(),
            MatrixFormat::Arcene => line.split_whitespace().collect(),
        };
        if fields.is_empty() {
            continue;
        }
        if header_allowed {
            header_allowed = false;
            if fields.iter().any(|f| parse_field(f, format).is_none()) {
                width = Some(fields.len());
                continue;
            }
        }
        if let Some(w) = width {
            if w != fields.len() {
                return Err(Error::data(format!(
                    "line {line_no}: {} fields, expected {w}",
                    fields.len()
                )));
            }
        }
        width = Some(fields.len());
        for f in &fields {
            let v = parse_field(f, format).ok_or_else(|| {
                Error::data(format!("line {line_no}: field {f:?} is not a valid number"))
            })?;
            values.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::data("no data rows"));
    }
    DataMatrix::from_row_major(n, width.unwrap_or(0), values)
}

pub fn ingest_matrix(path: &Path, format: MatrixFormat) -> Result<DataMatrix> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text, format)
        .map_err(|e| Error::data(format!("{}: {}", path.display(), strip_prefix(&e))))
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::InvalidData(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn write_matrix(path: &Path, data: &DataMatrix) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in data.rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn label_text(l: &Label) -> String {
    match l {
        Label::Normal(c) => format!("normal:{c}"),
        Label::Outlier => "outlier".into(),
    }
}

/// Writes `data.csv`, `labels.csv` and `spec.json` into `dir`.
pub fn write_dataset(dir: &Path, ds: &LabeledDataset) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_matrix(&dir.join("data.csv"), &ds.data)?;
    let mut w = BufWriter::new(fs::File::create(dir.join("labels.csv"))?);
    writeln!(w, "point_id,label")?;
    for (p, l) in ds.labels.iter().enumerate() {
        writeln!(w, "{},{}", p + 1, label_text(l))?;
    }
    w.flush()?;
    write_json(&dir.join("spec.json"), &ds.spec)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Contract(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Reads a labels file: `point_id,label` rows where the label is `outlier`
/// (or `1`) for outliers and anything else for normal points. Returns the
/// 0-based indices of the outliers.
pub fn read_outlier_labels(path: &Path) -> Result<Vec<usize>> {
    let file = fs::File::open(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let mut fields = split_fields(&line);
        let (Some(id), Some(label)) = (fields.next(), fields.next()) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::data(format!(
                "{} line {}: expected `point_id,label`",
                path.display(),
                idx + 1
            )));
        };
        let id: usize = match id.parse() {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(_) => {
                return Err(Error::data(format!(
                    "{} line {}: bad point id {id:?}",
                    path.display(),
                    idx + 1
                )))
            }
        };
        if id == 0 {
            return Err(Error::data(format!(
                "{} line {}: point ids start at 1",
                path.display(),
                idx + 1
            )));
        }
        if label.eq_ignore_ascii_case("outlier") || label == "1" {
            out.push(id - 1);
        }
    }
    Ok(out)
}

/// `rank,point_id,score,flagged` table in ranking order.
pub fn write_score_table(path: &Path, report: &ScoreReport, top_n: usize) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "rank,point_id,score,top")?;
    for (i, &p) in report.ranking.iter().enumerate() {
        writeln!(
            w,
            "{},{},{:?},{}",
            i + 1,
            p + 1,
            report.scores[p],
            u8::from(i < top_n)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_score_table`] back into a ranking of
/// 0-based point indices.
pub fn read_score_ranking(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut ranked: Vec<(usize, usize)> = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = split_fields(line).collect();
        let parse = |s: &str| s.parse::<usize>().ok();
        match (
            f.first().and_then(|s| parse(s)),
            f.get(1).and_then(|s| parse(s)),
        ) {
            (Some(rank), Some(id)) if id > 0 => ranked.push((rank, id - 1)),
            _ if line.trim().is_empty() => {}
            _ => {
                return Err(Error::data(format!(
                    "{} line {}: expected `rank,point_id,...`",
                    path.display(),
                    idx + 1
                )))
            }
        }
    }
    ranked.sort();
    Ok(ranked.into_iter().map(|(_, p)| p).collect())
}

pub fn write_pr_table(path: &Path, curve: &PrCurve) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "rank,recall,precision,f_measure")?;
    for p in &curve.points {
        writeln!(
            w,
            "{},{},{},{}",
            p.rank,
            p.recall,
            p.precision,
            p.f_measure()
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_parse() {
        let m = parse_matrix("1 2\n3 4", MatrixFormat::Delimited).unwrap();
        assert_eq!((m.n_points(), m.n_dims()), (2, 2));
        assert_eq!(m.row(1), &[3.0, 4.0]);
    }

    #[test]
    fn header_and_commas() {
        let m = parse_matrix("a,b,c\n1,2,3\n4, 5 ,6\n", MatrixFormat::Delimited).unwrap();
        assert_eq!((m.n_points(), m.n_dims()), (2, 3));
    }

    #[test]
    fn ragged_row_names_line() {
        let err = parse_matrix("1 2\n3 4\n5\n", MatrixFormat::Delimited).unwrap_err();
        assert!(
            matches!(&err, Error::InvalidData(m) if m.contains("line 3")),
            "{err}"
        );
    }

    #[test]
    fn non_numeric_after_data() {
        let err = parse_matrix("1 2\nx 4\n", MatrixFormat::Delimited).unwrap_err();
        assert!(matches!(&err, Error::InvalidData(m) if m.contains("line 2")));
    }

    #[test]
    fn empty_file() {
        assert!(matches!(
            parse_matrix("\n\n", MatrixFormat::Delimited),
            Err(Error::InvalidData(_))
        ));
    }

    #[test]
    fn arcene_rows() {
        let m = parse_matrix("0 12 5 \n3 0 7   \n", MatrixFormat::Arcene).unwrap();
        assert_eq!((m.n_points(), m.n_dims()), (2, 3));
        assert!(parse_matrix("0 1.5 2\n", MatrixFormat::Arcene).is_err());
        assert!(parse_matrix("h1 h2\n0 1\n", MatrixFormat::Arcene).is_err());
        assert!(parse_matrix("0 1 2\n0 1\n", MatrixFormat::Arcene).is_err());
    }
}
