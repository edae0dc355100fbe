//! Plain-text checkpoints.
//!
//! ```text
//! gnn-checkpoint 1
//! arch gcn
//! dims 16 128 64
//! seed 7
//! tensor 0 16 128
//! <row 0 values>
//! ...
//! ```
//!
//! Values are written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::model::{Arch, ModelParams};
use crate::nn::tensor::Matrix;
use crate::scalar::Scalar;

const MAGIC: &str = "gnn-checkpoint 1";

pub fn encode_checkpoint<T: Scalar>(params: &ModelParams<T>, seed: u64) -> String {
    let mut out = String::new();
    let dims: Vec<String> = params.dims.iter().map(ToString::to_string).collect();
    writeln!(out, "{MAGIC}\narch {}\ndims {}\nseed {seed}", params.arch, dims.join(" ")).unwrap();
    for (i, t) in params.tensors.iter().enumerate() {
        writeln!(out, "tensor {i} {} {}", t.rows(), t.cols()).unwrap();
        for r in 0..t.rows() {
            let row: Vec<String> = t.row(r).iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}

pub fn decode_checkpoint<T: Scalar>(text: &str) -> Result<(ModelParams<T>, u64)> {
    let path = std::path::PathBuf::from("<checkpoint>");
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            path: path.clone(),
            line: 0,
            message: format!("unexpected end of checkpoint, expected {what}"),
        })
    };
    let err = |line: usize, message: String| Error::Parse {
        path: std::path::PathBuf::from("<checkpoint>"),
        line,
        message,
    };

    let (ln, magic) = next("header")?;
    if magic != MAGIC {
        return Err(err(ln, format!("bad header `{magic}`")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (ln, l) = next(key)?;
        l.strip_prefix(key)
            .map(|rest| (ln, rest.trim().to_string()))
            .ok_or_else(|| err(ln, format!("expected `{key}`")))
    };
    let (_, arch) = field("arch")?;
    let arch: Arch = arch.parse()?;
    let (ln, dims) = field("dims")?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|d| d.parse().map_err(|_| err(ln, format!("bad dim `{d}`"))))
        .collect::<Result<_>>()?;
    let (ln, seed) = field("seed")?;
    let seed: u64 = seed.parse().map_err(|_| err(ln, format!("bad seed `{seed}`")))?;

    let shapes = ModelParams::<T>::tensor_shapes(arch, &dims);
    let mut tensors = Vec::with_capacity(shapes.len());
    for (i, &(rows, cols)) in shapes.iter().enumerate() {
        let (ln, head) = next("tensor header")?;
        let expected = format!("tensor {i} {rows} {cols}");
        if head != expected {
            return Err(err(ln, format!("expected `{expected}`, found `{head}`")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (ln, row) = next("tensor row")?;
            let before = data.len();
            for tok in row.split_whitespace() {
                data.push(tok.parse::<T>().map_err(|_| err(ln, format!("bad value `{tok}`")))?);
            }
            if data.len() - before != cols {
                return Err(err(ln, format!("expected {cols} values, found {}", data.len() - before)));
            }
        }
        tensors.push(Matrix::from_vec(rows, cols, data)?);
    }
    let params = ModelParams { arch, dims, tensors };
    params.validate()?;
    Ok((params, seed))
}

pub fn save_checkpoint<T: Scalar>(params: &ModelParams<T>, seed: u64, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(params, seed)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint<T: Scalar>(path: &Path) -> Result<(ModelParams<T>, u64)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}
