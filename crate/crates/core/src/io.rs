//! The field file format: a plain-text header of `key = value` lines, a
//! blank line, then the node values as little-endian `f64`.
//!
//! ```text
//! format_version = 1
//! d = 6
//! R = 60.0
//! N = 6000
//! kind = eigenfunction
//! count = 1
//! meta.e0 = 0.5308046663925178
//!
//! <N * count * 8 bytes>
//! ```
//!
//! Several fields on one grid (a trajectory) are stored back to back with
//! `count > 1`. Floats in the header use Rust's shortest round-trip form, so
//! reading back reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, RadialGrid};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct FieldFile {
    pub dim: usize,
    pub radius: f64,
    pub nodes: usize,
    pub kind: String,
    pub meta: BTreeMap<String, String>,
    /// `count` blocks of `nodes` values.
    pub values: Vec<f64>,
}

impl FieldFile {
    pub fn from_field(field: &Field, kind: &str) -> Self {
        Self::from_fields(std::slice::from_ref(field), kind).expect("one field always fits its own grid")
    }

    pub fn from_fields(fields: &[Field], kind: &str) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidArgument("no fields to store".into()))?;
        let mut values = Vec::with_capacity(first.len() * fields.len());
        for f in fields {
            first.ensure_same_grid(f)?;
            values.extend_from_slice(f.values());
        }
        let grid = first.grid();
        Ok(FieldFile {
            dim: grid.dim(),
            radius: grid.radius(),
            nodes: grid.len(),
            kind: kind.to_string(),
            meta: BTreeMap::new(),
            values,
        })
    }

    /// Attach metadata; floats should be passed as `f64` so they round-trip.
    pub fn with_meta(mut self, key: &str, value: impl MetaValue) -> Self {
        self.meta.insert(key.to_string(), value.render());
        self
    }

    pub fn count(&self) -> usize {
        self.values.len().checked_div(self.nodes).unwrap_or(0)
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        let raw = self
            .meta
            .get(key)
            .ok_or_else(|| Error::Format(format!("missing metadata `{key}`")))?;
        raw.parse()
            .map_err(|_| Error::Format(format!("metadata `{key}` = `{raw}` is not a number")))
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        RadialGrid::new(self.dim, self.radius, self.nodes)
    }

    /// All stored fields on a freshly built grid.
    pub fn fields(&self) -> Result<Vec<Field>> {
        let grid = self.grid()?;
        self.fields_on(&grid)
    }

    /// All stored fields on `grid`, which must match the header.
    pub fn fields_on(&self, grid: &Arc<RadialGrid>) -> Result<Vec<Field>> {
        if grid.dim() != self.dim || grid.radius() != self.radius || grid.len() != self.nodes {
            return Err(Error::GridMismatch);
        }
        self.values
            .chunks(self.nodes)
            .map(|chunk| Field::new(grid.clone(), chunk.to_vec()))
            .collect()
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let mut header = String::new();
        header.push_str(&format!("format_version = {FORMAT_VERSION}\n"));
        header.push_str(&format!("d = {}\n", self.dim));
        header.push_str(&format!("R = {:?}\n", self.radius));
        header.push_str(&format!("N = {}\n", self.nodes));
        header.push_str(&format!("kind = {}\n", self.kind));
        header.push_str(&format!("count = {}\n", self.count()));
        for (k, v) in &self.meta {
            if k.contains(['=', '\n']) || v.contains('\n') {
                return Err(Error::Format(format!("metadata `{k}` cannot be written")));
            }
            header.push_str(&format!("meta.{k} = {v}\n"));
        }
        header.push('\n');
        out.write_all(header.as_bytes())?;
        let mut payload = Vec::with_capacity(8 * self.values.len());
        for v in &self.values {
            payload.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&payload)?;
        Ok(())
    }

    pub fn read_from(input: impl Read) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut entries = BTreeMap::new();
        let mut meta = BTreeMap::new();
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line)? == 0 {
                return Err(Error::Format("header is not terminated by a blank line".into()));
            }
            let line = line.trim_end_matches(['\n', '\r']);
            if line.is_empty() {
                break;
            }
            let (key, value) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Format(format!("malformed header line `{line}`")))?;
            match key.strip_prefix("meta.") {
                Some(k) => meta.insert(k.to_string(), value.to_string()),
                None => entries.insert(key.to_string(), value.to_string()),
            };
        }
        let get = |key: &str| {
            entries
                .get(key)
                .ok_or_else(|| Error::Format(format!("header is missing `{key}`")))
        };
        let version: u32 = parse(get("format_version")?, "format_version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported format_version {version}")));
        }
        let dim: usize = parse(get("d")?, "d")?;
        let radius: f64 = parse(get("R")?, "R")?;
        let nodes: usize = parse(get("N")?, "N")?;
        let count: usize = parse(get("count")?, "count")?;
        let kind = get("kind")?.clone();
        let mut payload = Vec::new();
        reader.read_to_end(&mut payload)?;
        if payload.len() != 8 * nodes * count {
            return Err(Error::Format(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                8 * nodes * count
            )));
        }
        let values = payload
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("chunks of eight")))
            .collect();
        Ok(FieldFile {
            dim,
            radius,
            nodes,
            kind,
            meta,
            values,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = Vec::new();
        self.write_to(&mut bytes)?;
        fs::write(path, bytes)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(fs::File::open(path)?)
    }
}

fn parse<T: std::str::FromStr>(raw: &str, key: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Format(format!("header `{key}` = `{raw}` does not parse")))
}

/// Values stored in the metadata map.
pub trait MetaValue {
    fn render(&self) -> String;
}

impl MetaValue for f64 {
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

macro_rules! display_meta {
    ($($t:ty),*) => {$(
        impl MetaValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

display_meta!(usize, u64, i64, bool, &str, String);
