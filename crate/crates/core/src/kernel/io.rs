//! Kernel file formats.
//!
//! Text: a `p m` header line followed by one `i1 i2 ... ip a_J` line per
//! support, indices 1-based. Blank lines and lines starting with `#` are
//! ignored. JSON: `{"order": p, "size": m, "entries":
//! [{"indices": [...], "value": a_J}, ...]}`. Both print coefficients with
//! the shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{KernelError, SparseKernel};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
    order: usize,
    size: usize,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryDoc {
    indices: Vec<usize>,
    value: f64,
}

impl SparseKernel {
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 + self.len() * (8 * self.order() + 24));
        writeln!(out, "{} {}", self.order(), self.size()).unwrap();
        for (set, a) in self.supports() {
            for i in set {
                write!(out, "{i} ").unwrap();
            }
            writeln!(out, "{a:?}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, KernelError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let l = l.trim();
            !l.is_empty() && !l.starts_with('#')
        });
        let parse_err = |line: usize, message: String| KernelError::Parse {
            line: line + 1,
            message,
        };
        let (hline, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing `p m` header".into()))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| parse_err(hline, e.to_string()))?;
        let [order, size] = head[..] else {
            return Err(parse_err(hline, "header must be `p m`".into()));
        };
        let mut entries = Vec::new();
        for (ln, line) in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != order + 1 {
                return Err(parse_err(
                    ln,
                    format!("expected {} fields, found {}", order + 1, tokens.len()),
                ));
            }
            let key = tokens[..order]
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| parse_err(ln, e.to_string()))?;
            let value = tokens[order]
                .parse::<f64>()
                .map_err(|e| parse_err(ln, e.to_string()))?;
            entries.push((key, value));
        }
        SparseKernel::new(order, size, entries)
    }

    pub fn to_json(&self) -> String {
        self.json_doc(None)
    }

    /// JSON form with a leading `config_hash` field.
    pub fn to_json_tagged(&self, config_hash: &str) -> String {
        self.json_doc(Some(config_hash.to_string()))
    }

    fn json_doc(&self, config_hash: Option<String>) -> String {
        let doc = KernelDoc {
            config_hash,
            order: self.order(),
            size: self.size(),
            entries: self
                .supports()
                .map(|(set, a)| EntryDoc {
                    indices: set.iter().map(|&i| i as usize).collect(),
                    value: a,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("kernel serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, KernelError> {
        let doc: KernelDoc = serde_json::from_str(text)?;
        SparseKernel::new(
            doc.order,
            doc.size,
            doc.entries.into_iter().map(|e| (e.indices, e.value)),
        )
    }
}
