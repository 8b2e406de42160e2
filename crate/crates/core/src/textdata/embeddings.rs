use std::borrow::Cow;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::{fnv1a64, Rng};

/// Half-width of the uniform range used for out-of-vocabulary vectors.
pub const OOV_SCALE: f64 = 0.1;

/// Immutable token → vector map of a fixed dimension.
///
/// Lookups are total: a token that is not stored gets a vector drawn uniformly
/// from `[-0.1, 0.1]` by an [`Rng`] seeded with the FNV-1a 64-bit hash of the
/// token's UTF-8 bytes, so the same token always maps to the same vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            index: HashMap::new(),
            tokens: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Stored tokens in insertion order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Insert or replace a vector. Returns `true` if the token was already present.
    pub fn insert(&mut self, token: &str, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Shape(format!(
                "vector of length {} for table of dim {}",
                vector.len(),
                self.dim
            )));
        }
        if let Some(&i) = self.index.get(token) {
            self.vectors[i * self.dim..(i + 1) * self.dim].copy_from_slice(vector);
            return Ok(true);
        }
        self.index.insert(token.to_string(), self.tokens.len());
        self.tokens.push(token.to_string());
        self.vectors.extend_from_slice(vector);
        Ok(false)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    /// Vector for `token`, falling back to the hash-seeded OOV vector.
    pub fn embed_token(&self, token: &str) -> Cow<'_, [f64]> {
        match self.get(token) {
            Some(v) => Cow::Borrowed(v),
            None => Cow::Owned(oov_vector(token, self.dim)),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (i, token) in self.tokens.iter().enumerate() {
            write!(w, "{token}")?;
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Parse the `count dim` header format from any reader. `origin` names the
    /// source in error messages.
    pub fn read_from<R: BufRead>(reader: R, origin: &str) -> Result<Self> {
        let fmt_err = |line: usize, message: String| Error::Format {
            path: origin.to_string(),
            line,
            message,
        };
        let mut lines = reader.lines().enumerate();
        let (count, dim) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(fmt_err(1, "missing header line".into()));
            };
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                [c, d] => c.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((c, d)) if d > 0 => break (c, d),
                _ => {
                    return Err(fmt_err(
                        i + 1,
                        format!("bad header {line:?}, expected \"count dim\""),
                    ))
                }
            }
        };

        let mut table = EmbeddingTable::new(dim);
        let mut rows = 0usize;
        let mut row = Vec::with_capacity(dim);
        let mut last_line = 1;
        for (i, line) in lines {
            let lineno = i + 1;
            last_line = lineno;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line");
            row.clear();
            for p in parts {
                let v: f64 = p
                    .parse()
                    .map_err(|_| fmt_err(lineno, format!("non-numeric value {p:?}")))?;
                if !v.is_finite() {
                    return Err(fmt_err(lineno, format!("non-finite value {p:?}")));
                }
                row.push(v);
            }
            if row.len() != dim {
                return Err(fmt_err(
                    lineno,
                    format!("expected {dim} values for {token:?}, found {}", row.len()),
                ));
            }
            if table.insert(token, &row)? {
                log::warn!("{origin}:{lineno}: duplicate token {token:?}, keeping the last vector");
            }
            rows += 1;
        }
        if rows != count {
            return Err(fmt_err(
                last_line,
                format!("header declares {count} rows, found {rows}"),
            ));
        }
        Ok(table)
    }
}

fn oov_vector(token: &str, dim: usize) -> Vec<f64> {
    let mut rng = Rng::new(fnv1a64(token.as_bytes()));
    (0..dim)
        .map(|_| rng.uniform(-OOV_SCALE, OOV_SCALE))
        .collect()
}

/// Load an embedding file: a `count dim` header, then `token v1 … v_dim` rows.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingTable::read_from(BufReader::new(file), &path.display().to_string())
}
