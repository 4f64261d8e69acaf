//! CSV formats: numeric matrices, 0-based edge lists, stability profiles
//! and node-wise coefficients.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use subbotin_core::stability::StabilityProfile;
use subbotin_core::{Dataset, Graph};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Ragged { line: u64, expected: usize, found: usize },
    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("no data rows")]
    Empty,
    #[error("edge ({i}, {j}) at line {line} is invalid for {p} nodes")]
    BadEdge { line: u64, i: usize, j: usize, p: usize },
    #[error(transparent)]
    Core(#[from] subbotin_core::Error),
}

impl IoError {
    pub fn category(&self) -> &'static str {
        match self {
            IoError::File { .. } => "io",
            IoError::Parse { .. } | IoError::BadEdge { .. } => "parse",
            IoError::Ragged { .. } => "ragged-rows",
            IoError::NonFinite { .. } => "domain",
            IoError::Empty => "empty-input",
            IoError::Core(e) => e.category(),
        }
    }
}

fn file_error(path: &Path, source: std::io::Error) -> IoError {
    IoError::File { path: path.display().to_string(), source }
}

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::File { path: String::from("<csv>"), source },
        kind => IoError::Parse { line, message: format!("{kind:?}") },
    }
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r)
}

/// Parsed numeric table with its optional header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub data: Dataset,
}

/// Parse a comma-separated numeric matrix (rows are observations). A first
/// row containing any non-numeric field is taken as the header.
pub fn parse_csv<R: Read>(input: R) -> Result<Table, IoError> {
    let mut rdr = reader(input);
    let mut header = None;
    let mut rows: Vec<f64> = Vec::new();
    let mut width = None;
    let mut n = 0usize;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if k == 0 && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_owned).collect::<Vec<_>>());
            width = Some(rec.len());
            continue;
        }
        let expected = *width.get_or_insert(rec.len());
        if rec.len() != expected {
            return Err(IoError::Ragged { line, expected, found: rec.len() });
        }
        for (c, (v, raw)) in parsed.iter().zip(rec.iter()).enumerate() {
            match v {
                None => return Err(IoError::Parse { line, message: format!("column {c}: cannot parse {raw:?} as a number") }),
                Some(x) if !x.is_finite() => return Err(IoError::NonFinite { row: n, column: c }),
                Some(x) => rows.push(*x),
            }
        }
        n += 1;
    }
    let p = width.unwrap_or(0);
    if n == 0 || p == 0 {
        return Err(IoError::Empty);
    }
    Ok(Table { header, data: Dataset::from_row_major(n, p, &rows)? })
}

pub fn load_csv(path: &Path) -> Result<Dataset, IoError> {
    Ok(load_table(path)?.data)
}

pub fn load_table(path: &Path) -> Result<Table, IoError> {
    let f = File::open(path).map_err(|e| file_error(path, e))?;
    parse_csv(f)
}

/// Shortest decimal text that reads back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path).map(BufWriter::new).map_err(|e| file_error(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), IoError> {
    w.flush().map_err(|e| file_error(path, e))
}

/// Write a dataset with 17 significant digits so loading it back is exact.
pub fn write_dataset<W: Write>(out: &mut W, data: &Dataset, header: Option<&[String]>) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(out, "{}", h.join(","))?;
    }
    let mut line = String::new();
    for r in 0..data.n() {
        line.clear();
        for c in 0..data.p() {
            if c > 0 {
                line.push(',');
            }
            line.push_str(&format!("{:.16e}", data.get(r, c)));
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn save_csv(path: &Path, data: &Dataset, header: Option<&[String]>) -> Result<(), IoError> {
    let mut w = create(path)?;
    write_dataset(&mut w, data, header).map_err(|e| file_error(path, e))?;
    finish(w, path)
}

pub fn write_edges<W: Write>(out: &mut W, graph: &Graph) -> std::io::Result<()> {
    writeln!(out, "i,j")?;
    for (i, j) in graph.edges() {
        writeln!(out, "{i},{j}")?;
    }
    Ok(())
}

/// Edge list with header `i,j` and 0-based node indices.
pub fn save_edges(path: &Path, graph: &Graph) -> Result<(), IoError> {
    let mut w = create(path)?;
    write_edges(&mut w, graph).map_err(|e| file_error(path, e))?;
    finish(w, path)
}

pub fn parse_edges<R: Read>(input: R, p: usize) -> Result<Graph, IoError> {
    let mut g = Graph::empty(p);
    for (k, rec) in reader(input).records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(IoError::Ragged { line, expected: 2, found: rec.len() });
        }
        let (a, b) = (rec[0].parse::<usize>(), rec[1].parse::<usize>());
        let (i, j) = match (a, b) {
            (Ok(i), Ok(j)) => (i, j),
            _ if k == 0 => continue,
            _ => return Err(IoError::Parse { line, message: format!("bad edge {:?}", rec.iter().collect::<Vec<_>>()) }),
        };
        if i == j || i >= p || j >= p {
            return Err(IoError::BadEdge { line, i, j, p });
        }
        g.insert(i, j)?;
    }
    Ok(g)
}

pub fn load_edges(path: &Path, p: usize) -> Result<Graph, IoError> {
    let f = File::open(path).map_err(|e| file_error(path, e))?;
    parse_edges(f, p)
}

/// Rows `i,j,frequency` for every pair `i < j`.
pub fn save_profile(path: &Path, profile: &StabilityProfile) -> Result<(), IoError> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "i,j,frequency")?;
        for (i, j, f) in profile.entries() {
            writeln!(w, "{i},{j},{}", format_f64(f))?;
        }
        Ok(())
    })()
    .map_err(|e| file_error(path, e))?;
    finish(w, path)
}

/// Rows `node,neighbor,coefficient`: the coefficient of `neighbor` in the
/// regression of `node` on the other columns.
pub fn save_coefficients(path: &Path, neighborhoods: &[Vec<f64>]) -> Result<(), IoError> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "node,neighbor,coefficient")?;
        for (i, coefs) in neighborhoods.iter().enumerate() {
            for (m, c) in coefs.iter().enumerate() {
                let j = if m < i { m } else { m + 1 };
                writeln!(w, "{i},{j},{}", format_f64(*c))?;
            }
        }
        Ok(())
    })()
    .map_err(|e| file_error(path, e))?;
    finish(w, path)
}

pub fn save_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|e| file_error(path, e))
}
