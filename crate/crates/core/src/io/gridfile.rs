//! Line-oriented grid files.
//!
//! ```text
//! METAGRID 1 <nx> <ny> <x0> <y0> <hx> <hy> <name>
//! <value at (0, 0)>
//! <value at (1, 0)>
//! ...
//! ```
//!
//! Values are row-major with `x` varying fastest, one per line, written in
//! the shortest form that parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Grid2, ScalarField};

pub const MAGIC: &str = "METAGRID";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub name: String,
    pub field: ScalarField,
}

impl GridFile {
    pub fn new(name: impl Into<String>, field: ScalarField) -> Self {
        GridFile {
            name: name.into(),
            field,
        }
    }

    pub fn to_text(&self) -> String {
        let g = &self.field.grid;
        let mut out = String::with_capacity(24 * g.len() + 80);
        let _ = writeln!(
            out,
            "{MAGIC} {VERSION} {} {} {} {} {} {} {}",
            g.nx, g.ny, g.x0, g.y0, g.hx, g.hy, self.name
        );
        for v in &self.field.values {
            let _ = writeln!(out, "{v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty grid file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 9 {
            return Err(Error::Format(format!(
                "grid header must have 9 fields, found {}",
                fields.len()
            )));
        }
        if fields[0] != MAGIC {
            return Err(Error::Format(format!("expected format tag {MAGIC}, found `{}`", fields[0])));
        }
        if fields[1] != VERSION.to_string() {
            return Err(Error::Format(format!("unsupported grid version `{}`", fields[1])));
        }
        let int = |k: usize, what: &str| {
            fields[k]
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("header field {what} is not a count: `{}`", fields[k])))
        };
        let float = |k: usize, what: &str| {
            fields[k]
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("header field {what} is not a number: `{}`", fields[k])))
        };
        let (nx, ny) = (int(2, "nx")?, int(3, "ny")?);
        let grid = Grid2::new(nx, ny, float(4, "x0")?, float(5, "y0")?, float(6, "hx")?, float(7, "hy")?)
            .map_err(|e| Error::Format(format!("invalid grid header: {e}")))?;
        let expected = grid.len();
        let mut values = Vec::with_capacity(expected);
        for (k, line) in lines.enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v = t
                .parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: `{t}` is not a number", k + 2)))?;
            values.push(v);
        }
        if values.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} values ({nx} x {ny}), found {}",
                values.len()
            )));
        }
        Ok(GridFile {
            name: fields[8].to_string(),
            field: ScalarField { grid, values },
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}
