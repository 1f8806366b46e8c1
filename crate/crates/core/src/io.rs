//! Text formats: channel and kernel spec strings, and their JSON files.
//!
//! * channel spec: `qec:<q>:<ε>`, `qsc:<q>:<p>`, `file:<path>`
//! * kernel spec: `rs:<q>[:gamma=<int>]`, `arikan`, `matrix:<path>`, `map:<path>`
//! * channel file: `{"q": 2, "outputs": ["0", "1", "?"], "probs": [[...], [...]]}`
//! * matrix file: `{"q": 4, "matrix": [[...], ...]}`
//! * map file: `{"q": 2, "table": [[0, 0], [1, 1], ...]}`
//! * frozen file: `{"frozen": [3, [5, 1], ...]}`, a bare index freezing to 0

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;
use serde_json::Value;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::gfq::Field;
use crate::kernel::Kernel;

/// Largest alphabet accepted in spec strings.
pub const MAX_SPEC_Q: usize = 64;

/// Largest kernel size accepted from matrix files.
pub const MAX_MATRIX_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSpec {
    Erasure { q: usize, eps: f64 },
    Symmetric { q: usize, p: f64 },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    ReedSolomon { q: usize, gamma: Option<usize> },
    Arikan,
    Matrix(PathBuf),
    Map(PathBuf),
}

fn parse_q(s: &str) -> Result<usize> {
    let q: usize = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not an alphabet size")))?;
    if !(2..=MAX_SPEC_Q).contains(&q) {
        return Err(Error::Parse(format!("alphabet size {q} outside 2..={MAX_SPEC_Q}")));
    }
    Ok(q)
}

fn parse_probability(s: &str) -> Result<f64> {
    let p: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parse(format!("{p} is not a probability")));
    }
    Ok(p)
}

fn nonempty_path(s: &str) -> Result<PathBuf> {
    if s.is_empty() {
        return Err(Error::Parse("empty path".into()));
    }
    Ok(PathBuf::from(s))
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("channel spec `{s}`: expected qec:<q>:<eps>, qsc:<q>:<p> or file:<path>")))?;
        match kind {
            "qec" | "qsc" => {
                let (q, p) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("channel spec `{s}`: expected {kind}:<q>:<probability>")))?;
                let q = parse_q(q)?;
                let p = parse_probability(p)?;
                Ok(if kind == "qec" {
                    Self::Erasure { q, eps: p }
                } else {
                    Self::Symmetric { q, p }
                })
            }
            "file" => Ok(Self::File(nonempty_path(rest)?)),
            other => Err(Error::Parse(format!("unknown channel kind `{other}`"))),
        }
    }
}

impl ChannelSpec {
    pub fn build(&self) -> Result<Channel> {
        match self {
            Self::Erasure { q, eps } => Channel::erasure(*q, *eps),
            Self::Symmetric { q, p } => Channel::symmetric(*q, *p),
            Self::File(path) => parse_channel_json(&read(path)?),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "arikan" {
            return Ok(Self::Arikan);
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| {
            Error::Parse(format!(
                "kernel spec `{s}`: expected rs:<q>[:gamma=<int>], arikan, matrix:<path> or map:<path>"
            ))
        })?;
        match kind {
            "rs" => {
                let (q, gamma) = match rest.split_once(':') {
                    None => (rest, None),
                    Some((q, opt)) => {
                        let value = opt
                            .strip_prefix("gamma=")
                            .ok_or_else(|| Error::Parse(format!("unknown kernel option `{opt}`")))?;
                        let g: usize = value
                            .parse()
                            .map_err(|_| Error::Parse(format!("gamma `{value}` is not an integer")))?;
                        (q, Some(g))
                    }
                };
                Ok(Self::ReedSolomon { q: parse_q(q)?, gamma })
            }
            "matrix" => Ok(Self::Matrix(nonempty_path(rest)?)),
            "map" => Ok(Self::Map(nonempty_path(rest)?)),
            other => Err(Error::Parse(format!("unknown kernel kind `{other}`"))),
        }
    }
}

impl KernelSpec {
    /// Builds the kernel; `γ` defaults to the primitive element.
    pub fn build(&self) -> Result<Kernel> {
        match self {
            Self::ReedSolomon { q, gamma } => {
                let f = Field::new(*q)?;
                let g = gamma.unwrap_or_else(|| f.primitive_element());
                Kernel::reed_solomon(&f, g)
            }
            Self::Arikan => Ok(Kernel::arikan()),
            Self::Matrix(path) => parse_matrix_json(&read(path)?),
            Self::Map(path) => parse_map_json(&read(path)?),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn json_error(what: &str, e: serde_json::Error) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    q: usize,
    outputs: Vec<Value>,
    probs: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    q: usize,
    matrix: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    q: usize,
    table: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FrozenFile {
    frozen: Vec<FrozenEntry>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FrozenEntry {
    Index(usize),
    Valued(usize, usize),
}

/// Reads a channel file. Labels may be JSON strings or numbers and must be distinct.
pub fn parse_channel_json(text: &str) -> Result<Channel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| json_error("channel file", e))?;
    let labels = file
        .outputs
        .iter()
        .map(|v| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            other => Err(Error::Parse(format!("output label {other} is neither a string nor a number"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<&String> = labels.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::Parse(format!("duplicate output label `{}`", w[0])));
    }
    Channel::with_labels(file.q, labels, &file.probs)
}

/// Serializes a channel in the channel-file format.
pub fn channel_to_json(w: &Channel) -> String {
    let value = serde_json::json!({
        "q": w.input_size(),
        "outputs": w.labels(),
        "probs": w.rows(),
    });
    serde_json::to_string_pretty(&value).expect("serializable")
}

/// Reads a matrix file into a linear kernel.
pub fn parse_matrix_json(text: &str) -> Result<Kernel> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| json_error("matrix file", e))?;
    if file.matrix.len() > MAX_MATRIX_SIZE {
        return Err(Error::Parse(format!("matrix size {} exceeds {MAX_MATRIX_SIZE}", file.matrix.len())));
    }
    let field = Field::new(file.q)?;
    Kernel::from_matrix(&field, &file.matrix)
}

/// Reads a map file into a kernel; `ℓ` is the tuple length.
pub fn parse_map_json(text: &str) -> Result<Kernel> {
    let file: MapFile = serde_json::from_str(text).map_err(|e| json_error("map file", e))?;
    let ell = file.table.first().map_or(0, Vec::len);
    Kernel::from_map(file.q, ell, &file.table)
}

/// Reads a frozen file for a block of length `len` over `q` symbols.
pub fn parse_frozen_json(text: &str, len: usize, q: usize) -> Result<Vec<Option<usize>>> {
    let file: FrozenFile = serde_json::from_str(text).map_err(|e| json_error("frozen file", e))?;
    let mut frozen = vec![None; len];
    for entry in file.frozen {
        let (i, v) = match entry {
            FrozenEntry::Index(i) => (i, 0),
            FrozenEntry::Valued(i, v) => (i, v),
        };
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, limit: len });
        }
        if v >= q {
            return Err(Error::InvalidElement { value: v, q });
        }
        if frozen[i].replace(v).is_some() {
            return Err(Error::Parse(format!("index {i} frozen twice")));
        }
    }
    Ok(frozen)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_specs() {
        assert_eq!("qec:4:0.25".parse::<ChannelSpec>().unwrap(), ChannelSpec::Erasure { q: 4, eps: 0.25 });
        assert_eq!("qsc:2:0.1".parse::<ChannelSpec>().unwrap(), ChannelSpec::Symmetric { q: 2, p: 0.1 });
        assert_eq!("file:a.json".parse::<ChannelSpec>().unwrap(), ChannelSpec::File("a.json".into()));
        for bad in ["qec:4", "qec:1:0.5", "qec:65:0.5", "qsc:2:1.5", "qsc:2:nan", "bsc:2:0.1", "file:", ""] {
            assert!(bad.parse::<ChannelSpec>().is_err(), "{bad}");
        }
        let w = "qec:4:0.25".parse::<ChannelSpec>().unwrap().build().unwrap();
        assert!((w.symmetric_capacity() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn kernel_specs() {
        assert_eq!("arikan".parse::<KernelSpec>().unwrap(), KernelSpec::Arikan);
        assert_eq!("rs:4".parse::<KernelSpec>().unwrap(), KernelSpec::ReedSolomon { q: 4, gamma: None });
        assert_eq!(
            "rs:5:gamma=3".parse::<KernelSpec>().unwrap(),
            KernelSpec::ReedSolomon { q: 5, gamma: Some(3) }
        );
        for bad in ["rs", "rs:6x", "rs:4:g=1", "rs:4:gamma=", "hadamard", "map:"] {
            assert!(bad.parse::<KernelSpec>().is_err(), "{bad}");
        }
        assert_eq!("rs:6".parse::<KernelSpec>().unwrap().build().unwrap_err(), Error::NotPrimePower(6));
        assert_eq!(
            "rs:4:gamma=0".parse::<KernelSpec>().unwrap().build().unwrap_err(),
            Error::GammaZero
        );
        let k = "rs:4".parse::<KernelSpec>().unwrap().build().unwrap();
        assert_eq!(k.size(), 4);
    }

    #[test]
    fn channel_json_roundtrip() {
        let text = r#"{"q": 2, "outputs": [0, "e", 1], "probs": [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]}"#;
        let w = parse_channel_json(text).unwrap();
        assert_eq!(w.labels(), ["0", "e", "1"]);
        assert_eq!(parse_channel_json(&channel_to_json(&w)).unwrap(), w);
        assert!(parse_channel_json(r#"{"q": 2, "outputs": ["a", "a"], "probs": [[1, 0], [0, 1]]}"#).is_err());
        assert!(parse_channel_json(r#"{"q": 2, "outputs": [null], "probs": [[1], [1]]}"#).is_err());
        assert!(parse_channel_json(r#"{"q": 2, "outputs": ["a"], "probs": [[0.9], [1]]}"#).is_err());
    }

    #[test]
    fn kernel_json() {
        let k = parse_matrix_json(r#"{"q": 2, "matrix": [[1, 0], [1, 1]]}"#).unwrap();
        assert_eq!(&k, &Kernel::arikan());
        assert_eq!(
            parse_matrix_json(r#"{"q": 3, "matrix": [[0, 0], [0, 0]]}"#).unwrap_err(),
            Error::SingularMatrix
        );
        let m = parse_map_json(r#"{"q": 2, "table": [[0, 0], [1, 1], [1, 0], [0, 1]]}"#).unwrap();
        assert_eq!(m.matrix(), Kernel::arikan().matrix());
        assert!(matches!(
            parse_map_json(r#"{"q": 2, "table": [[0, 0], [1, 1], [1, 1], [0, 1]]}"#),
            Err(Error::NotBijective(_))
        ));
        assert!(parse_map_json(r#"{"q": 2, "table": []}"#).is_err());
    }

    #[test]
    fn frozen_json() {
        let f = parse_frozen_json(r#"{"frozen": [0, [2, 1]]}"#, 4, 2).unwrap();
        assert_eq!(f, vec![Some(0), None, Some(1), None]);
        assert!(parse_frozen_json(r#"{"frozen": [4]}"#, 4, 2).is_err());
        assert!(parse_frozen_json(r#"{"frozen": [[1, 2]]}"#, 4, 2).is_err());
        assert!(parse_frozen_json(r#"{"frozen": [1, 1]}"#, 4, 2).is_err());
    }
}
