use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use stirling_gamma::Partition;

use crate::error::{CliError, CliResult};

/// Destination directory for a run.
pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> CliResult<PathBuf> {
        let p = self.path(name);
        fs::write(&p, contents).map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut s = serde_json::to_string_pretty(value).expect("serializable value");
        s.push('\n');
        self.write(name, &s)
    }
}

/// CSV with a header row and `{}` (shortest round-trip) formatting.
pub struct Table {
    buf: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Table { buf }
    }

    pub fn headerless() -> Self {
        Table { buf: String::new() }
    }

    pub fn row<T: std::fmt::Display>(&mut self, cells: &[T]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            write!(self.buf, "{c}").unwrap();
        }
        self.buf.push('\n');
    }

    pub fn line(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Square matrix as a headerless CSV.
pub fn matrix_csv(values: &[f64], n: usize) -> String {
    let mut t = Table::headerless();
    for row in values.chunks(n) {
        t.row(row);
    }
    t.finish()
}

/// Rows of comma- or whitespace-separated fields, skipping blank lines.
/// Returns (1-based line number, fields).
fn read_records(path: &Path) -> CliResult<Vec<(usize, Vec<String>)>> {
    let mut text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let delim = if text.contains(',') {
        b','
    } else {
        text = text.replace('\t', " ");
        b' '
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delim)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(path, e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let fields: Vec<String> = rec
            .iter()
            .filter(|f| !f.is_empty())
            .map(str::to_string)
            .collect();
        if !fields.is_empty() {
            out.push((line, fields));
        }
    }
    Ok(out)
}

fn parse_row<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    fields: &[String],
) -> CliResult<Vec<T>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<T>()
                .map_err(|_| CliError::input(path, format!("line {line}: cannot parse {f:?}")))
        })
        .collect()
}

/// Numeric table, one observation per row; a non-numeric first row is a header.
pub fn read_points(path: &Path) -> CliResult<(usize, Vec<f64>)> {
    let mut recs = read_records(path)?;
    if let Some((_, first)) = recs.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            recs.remove(0);
        }
    }
    let Some((_, first)) = recs.first() else {
        return Err(CliError::input(path, "no observations"));
    };
    let dim = first.len();
    let mut values = Vec::with_capacity(dim * recs.len());
    for (line, fields) in &recs {
        if fields.len() != dim {
            return Err(CliError::input(
                path,
                format!(
                    "line {line}: expected {dim} columns, found {}",
                    fields.len()
                ),
            ));
        }
        values.extend(parse_row::<f64>(path, *line, fields)?);
    }
    Ok((dim, values))
}

/// A partition given as labels separated by commas, spaces or newlines.
pub fn read_partition(path: &Path) -> CliResult<Partition> {
    let labels: Vec<u64> = read_records(path)?
        .iter()
        .map(|(line, f)| parse_row::<u64>(path, *line, f))
        .collect::<CliResult<Vec<_>>>()?
        .concat();
    if labels.is_empty() {
        return Err(CliError::input(path, "no labels"));
    }
    Ok(Partition::from_labels(&labels)?)
}

/// A network file read as a row-major n×n 0/1 matrix.
pub struct NetworkFile {
    pub n: usize,
    pub adjacency: Vec<u8>,
    /// Warnings about repairs applied while reading.
    pub warnings: Vec<String>,
}

/// Reads a dense adjacency matrix, or an edge list of 1-based node pairs.
///
/// A file whose rows all have as many 0/1 entries as there are rows is
/// dense; anything else with two columns is an edge list. Both are
/// symmetrized and the diagonal is cleared, with a warning when that changes
/// anything.
pub fn read_network(path: &Path, nodes: Option<usize>) -> CliResult<NetworkFile> {
    let recs = read_records(path)?;
    if recs.is_empty() {
        return Err(CliError::input(path, "empty network file"));
    }
    let rows: Vec<Vec<u64>> = recs
        .iter()
        .map(|(line, f)| parse_row::<u64>(path, *line, f))
        .collect::<CliResult<_>>()?;
    let r = rows.len();
    let dense = rows
        .iter()
        .all(|row| row.len() == r && row.iter().all(|&v| v <= 1))
        && nodes.is_none_or(|n| n == r);
    let mut warnings = Vec::new();
    let (n, mut adj) = if dense {
        let mut adj = vec![0u8; r * r];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                adj[i * r + j] = v as u8;
            }
        }
        (r, adj)
    } else {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != 2 {
                return Err(CliError::input(
                    path,
                    format!(
                        "line {}: an edge list needs two node ids per line",
                        recs[k].0
                    ),
                ));
            }
            if row.contains(&0) {
                return Err(CliError::input(
                    path,
                    format!("line {}: node ids start at 1", recs[k].0),
                ));
            }
        }
        let max_id = rows.iter().flatten().copied().max().unwrap_or(0) as usize;
        let n = nodes.unwrap_or(max_id);
        if max_id > n {
            return Err(CliError::input(
                path,
                format!("node id {max_id} exceeds --nodes {n}"),
            ));
        }
        let mut adj = vec![0u8; n * n];
        for row in &rows {
            let (i, j) = (row[0] as usize - 1, row[1] as usize - 1);
            adj[i * n + j] = 1;
        }
        (n, adj)
    };
    let mut asym = 0usize;
    let mut diag = 0usize;
    for i in 0..n {
        if adj[i * n + i] != 0 {
            adj[i * n + i] = 0;
            diag += 1;
        }
        for j in i + 1..n {
            let (x, y) = (adj[i * n + j], adj[j * n + i]);
            if x != y {
                if dense {
                    asym += 1;
                }
                adj[i * n + j] = 1;
                adj[j * n + i] = 1;
            }
        }
    }
    if asym > 0 {
        warnings.push(format!(
            "{}: symmetrized {asym} asymmetric pairs",
            path.display()
        ));
    }
    if diag > 0 {
        warnings.push(format!("{}: dropped {diag} self-loops", path.display()));
    }
    Ok(NetworkFile {
        n,
        adjacency: adj,
        warnings,
    })
}
