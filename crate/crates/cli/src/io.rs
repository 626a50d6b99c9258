//! Matrix ingestion (Matrix Market, headerless CSV) and Matrix Market output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use cssp::Matrix;

use crate::error::CliError;

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { line, column, message: message.into() }
}

/// Reads a matrix, detecting Matrix Market by its `%%MatrixMarket` banner
/// and treating anything else as CSV.
pub fn ingest(path: &Path, transpose: bool) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let a = parse_matrix(&text)?;
    Ok(if transpose { a.transpose() } else { a })
}

pub fn parse_matrix(text: &str) -> Result<Matrix, CliError> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.trim_start().starts_with("%%") {
        parse_matrix_market(text)
    } else {
        parse_csv(text)
    }
}

/// Tokens of a line with their 1-based starting columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter().map(|(s, t)| (line[..s].chars().count() + 1, t)).collect()
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Array,
    Coordinate,
}

pub fn parse_matrix_market(text: &str) -> Result<Matrix, CliError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| parse_err(1, 1, "empty input"))?;
    let toks = tokens(header);
    let expect = |idx: usize, allowed: &[&str], what: &str| -> Result<String, CliError> {
        let (col, tok) = toks
            .get(idx)
            .copied()
            .ok_or_else(|| parse_err(hline, header.len() + 1, format!("missing {what} in header")))?;
        let lower = tok.to_ascii_lowercase();
        if allowed.contains(&lower.as_str()) {
            Ok(lower)
        } else {
            Err(parse_err(hline, col, format!("unsupported {what} `{tok}` (expected one of {allowed:?})")))
        }
    };
    expect(0, &["%%matrixmarket"], "banner")?;
    expect(1, &["matrix"], "object")?;
    let layout = match expect(2, &["array", "coordinate"], "format")?.as_str() {
        "array" => Layout::Array,
        _ => Layout::Coordinate,
    };
    expect(3, &["real", "integer", "double"], "field")?;
    let symmetric = expect(4, &["general", "symmetric"], "symmetry")? == "symmetric";
    if let Some(&(col, tok)) = toks.get(5) {
        return Err(parse_err(hline, col, format!("unexpected token `{tok}` in header")));
    }

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or_else(|| parse_err(hline + 1, 1, "missing size line"))?;
    let size_toks = tokens(size);
    let want = if layout == Layout::Array { 2 } else { 3 };
    if size_toks.len() != want {
        return Err(parse_err(sline, 1, format!("size line needs {want} integers, found {}", size_toks.len())));
    }
    let int = |line: usize, (col, tok): (usize, &str)| -> Result<usize, CliError> {
        tok.parse::<usize>().map_err(|_| parse_err(line, col, format!("expected a nonnegative integer, found `{tok}`")))
    };
    let rows = int(sline, size_toks[0])?;
    let cols = int(sline, size_toks[1])?;
    if symmetric && rows != cols {
        return Err(CliError::Dimension(format!("symmetric matrix must be square, got {rows}x{cols}")));
    }
    let real = |line: usize, (col, tok): (usize, &str)| -> Result<f64, CliError> {
        tok.parse::<f64>().map_err(|_| parse_err(line, col, format!("expected a real number, found `{tok}`")))
    };

    let mut data = vec![0.0; rows * cols];
    match layout {
        Layout::Array => {
            // column-major; symmetric stores the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| (if symmetric { j } else { 0 }..rows).map(move |i| (i, j)))
                .collect();
            let mut pos = positions.iter();
            for (line, l) in body {
                for tok in tokens(l) {
                    let v = real(line, tok)?;
                    let &(i, j) = pos.next().ok_or_else(|| {
                        CliError::Dimension(format!("line {line}: more entries than the {rows}x{cols} header allows"))
                    })?;
                    data[i * cols + j] = v;
                    if symmetric {
                        data[j * cols + i] = v;
                    }
                }
            }
            let missing = pos.count();
            if missing > 0 {
                return Err(CliError::Dimension(format!("{missing} entries missing for a {rows}x{cols} array")));
            }
        }
        Layout::Coordinate => {
            let nnz = int(sline, size_toks[2])?;
            let mut seen = 0;
            for (line, l) in body {
                let t = tokens(l);
                if t.len() != 3 {
                    return Err(parse_err(line, 1, format!("coordinate entry needs `row col value`, found {} tokens", t.len())));
                }
                let (i, j) = (int(line, t[0])?, int(line, t[1])?);
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(CliError::Dimension(format!("line {line}: index ({i}, {j}) outside {rows}x{cols}")));
                }
                let v = real(line, t[2])?;
                data[(i - 1) * cols + (j - 1)] = v;
                if symmetric {
                    data[(j - 1) * cols + (i - 1)] = v;
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(CliError::Dimension(format!("header declares {nnz} entries, found {seen}")));
            }
        }
    }
    Matrix::new(rows, cols, data).map_err(CliError::Core)
}

pub fn parse_csv(text: &str) -> Result<Matrix, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(rows.len() + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(line, c + 1, format!("expected a real number, found `{f}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CliError::Dimension(format!(
                    "line {line}: {} fields, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(1, 1, "no data rows"));
    }
    Matrix::from_rows(&rows).map_err(CliError::Core)
}

/// Matrix Market `array real general`, column-major, 17 significant digits
/// (enough to round-trip every `f64`).
pub fn to_matrix_market(a: &Matrix, comment: &str) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    for line in comment.lines() {
        let _ = writeln!(out, "% {line}");
    }
    let _ = writeln!(out, "{} {}", a.n_rows(), a.n_cols());
    for j in 0..a.n_cols() {
        for i in 0..a.n_rows() {
            let _ = writeln!(out, "{:.16e}", a.get(i, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_identity() {
        let a = parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
        assert_eq!(a, Matrix::identity(2));
    }

    #[test]
    fn symmetric_and_coordinate() {
        let a = parse_matrix("%%MatrixMarket matrix array real symmetric\n% c\n2 2\n4\n1\n3\n").unwrap();
        assert_eq!(a, Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap());
        let b = parse_matrix("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 4\n2 1 1\n").unwrap();
        assert_eq!(b, Matrix::from_rows(&[vec![4.0, 1.0], vec![1.0, 0.0]]).unwrap());
        let c = parse_matrix("%%MatrixMarket matrix coordinate integer general\n2 3 1\n2 3 7\n").unwrap();
        assert_eq!(c.get(1, 2), 7.0);
    }

    #[test]
    fn header_errors_name_the_token() {
        let e = parse_matrix("%%MatrixMarket matrix array complex general\n1 1\n1\n").unwrap_err();
        match e {
            CliError::Parse { line, column, message } => {
                assert_eq!((line, column), (1, 29));
                assert!(message.contains("complex"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n"),
            Err(CliError::Dimension(_))
        ));
        assert!(matches!(
            parse_matrix("%%MatrixMarket matrix array real general\n1 1\nx\n"),
            Err(CliError::Parse { line: 3, column: 1, .. })
        ));
    }

    #[test]
    fn csv_rows() {
        let a = parse_matrix("1,1,0\n1,0,1\n").unwrap();
        assert_eq!((a.n_rows(), a.n_cols()), (2, 3));
        let t = a.transpose();
        assert_eq!(t, cssp::instances::hard_instance::<f64>(2, 1.0).unwrap());
        assert!(matches!(parse_matrix("1,2\n3\n"), Err(CliError::Dimension(_))));
        assert!(matches!(parse_matrix("1,2\n3,abc\n"), Err(CliError::Parse { line: 2, column: 2, .. })));
    }

    #[test]
    fn matrix_market_round_trip_is_exact() {
        let a = cssp::instances::random_gaussian::<f64>(5, 3, 42).unwrap();
        let text = to_matrix_market(&a, "random:n=5,d=3,seed=42");
        assert_eq!(parse_matrix(&text).unwrap(), a);
    }
}
