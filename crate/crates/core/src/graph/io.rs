use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Edge, Graph};
use crate::error::{Error, Result};
use crate::nn::tensor::Matrix;
use crate::scalar::Scalar;

/// Width of the synthetic features used when no feature file is given.
pub const DEFAULT_FEATURE_DIM: usize = 32;

/// Reads an edge list (`u v` per line, `#` comments) and an optional
/// headerless feature CSV.
///
/// A `# nodes N ...` comment, as written by [`save_edges`], raises the node
/// count to at least `N` so trailing isolated nodes survive a round trip.
///
/// Without a feature file every node `i` gets a one-hot row with the hot
/// column at `i % feature_dim`.
pub fn load_graph<T: Scalar>(
    edge_path: &Path,
    feature_path: Option<&Path>,
    feature_dim: Option<usize>,
) -> Result<Graph<T>> {
    let text = fs::read_to_string(edge_path).map_err(|e| Error::io(edge_path, e))?;
    let mut pairs: Vec<Edge> = Vec::new();
    let mut max_id: Option<usize> = None;
    let mut declared = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("nodes") {
                if let Some(n) = words.next().and_then(|w| w.parse::<usize>().ok()) {
                    declared = declared.max(n);
                }
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: edge_path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(parse_err(format!("expected two node ids, found {} fields", tokens.len())));
        }
        let mut ids = [0usize; 2];
        for (slot, tok) in ids.iter_mut().zip(&tokens) {
            *slot = tok
                .parse()
                .map_err(|_| parse_err(format!("`{tok}` is not a non-negative integer")))?;
        }
        max_id = Some(max_id.map_or(ids[0].max(ids[1]), |m| m.max(ids[0]).max(ids[1])));
        pairs.push((ids[0], ids[1]));
    }
    let from_edges = max_id.map_or(0, |m| m + 1).max(declared);

    let features = match feature_path {
        Some(path) => {
            let rows = read_feature_csv::<T>(path)?;
            if rows.len() < from_edges {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: rows.len(),
                    message: format!(
                        "{} feature rows but edge list references node {}",
                        rows.len(),
                        from_edges - 1
                    ),
                });
            }
            Matrix::from_rows(&rows)?
        }
        None => {
            let dim = feature_dim.unwrap_or(DEFAULT_FEATURE_DIM);
            if dim == 0 {
                return Err(Error::InvalidArgument("feature_dim must be at least 1".into()));
            }
            let mut m = Matrix::zeros(from_edges, dim);
            for i in 0..from_edges {
                m[(i, i % dim)] = T::one();
            }
            m
        }
    };
    Graph::new(features.rows(), pairs, features)
}

fn read_feature_csv<T: Scalar>(path: &Path) -> Result<Vec<Vec<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record = record.map_err(|e| err(e.to_string()))?;
        let row: Vec<T> = record
            .iter()
            .map(|f| f.parse::<T>().map_err(|_| err(format!("`{f}` is not a number"))))
            .collect::<Result<_>>()?;
        if *width.get_or_insert(row.len()) != row.len() {
            return Err(err(format!("expected {} columns, found {}", width.unwrap_or(0), row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Writes the edge list in the format [`load_graph`] reads.
pub fn save_edges<T: Scalar>(graph: &Graph<T>, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# nodes {} edges {}", graph.num_nodes(), graph.num_edges()).expect("write to vec");
    for &(u, v) in graph.edges() {
        writeln!(out, "{u}\t{v}").expect("write to vec");
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
