//! Field files: CSV with the columns `r,u,du,v,dv`.

use std::path::Path;

use biharmonic_core::{FieldColumns, Nonlinearity, ProblemParams, RadialField};

use crate::error::{CliError, CliResult};
use crate::output::csv_table;

pub const FIELD_HEADER: [&str; 5] = ["r", "u", "du", "v", "dv"];

pub fn field_csv(field: &RadialField) -> CliResult<String> {
    let rows = (0..field.len()).map(|i| {
        vec![
            field.radii()[i],
            field.u()[i],
            field.du()[i],
            field.v()[i],
            field.dv()[i],
        ]
    });
    csv_table(&FIELD_HEADER, rows)
}

/// Parses field CSV text. `origin` names the source in error messages.
pub fn parse_columns(text: &str, origin: &str) -> CliResult<FieldColumns> {
    let bad = |reason: String| CliError::Input {
        path: origin.to_string(),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let mut index = [0usize; 5];
    for (slot, name) in index.iter_mut().zip(FIELD_HEADER) {
        *slot = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| bad(format!("missing column '{name}'")))?;
    }
    let mut cols = FieldColumns::default();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut vals = [0.0; 5];
        for (v, &k) in vals.iter_mut().zip(&index) {
            let cell = rec
                .get(k)
                .ok_or_else(|| bad(format!("row {}: too few columns", line + 2)))?;
            *v = cell
                .parse()
                .map_err(|_| bad(format!("row {}: '{cell}' is not a number", line + 2)))?;
        }
        cols.radii.push(vals[0]);
        cols.u.push(vals[1]);
        cols.du.push(vals[2]);
        cols.v.push(vals[3]);
        cols.dv.push(vals[4]);
    }
    Ok(cols)
}

/// How to interpret the columns of a field file.
#[derive(Debug, Clone, Copy)]
pub struct FieldSpec {
    pub params: ProblemParams,
    pub nonlinearity: Nonlinearity,
    /// Smooth at the origin. The first grid radius is then treated as the
    /// hand-off point of the series start, as for shooting output.
    pub regular: bool,
    pub tolerance: f64,
}

pub fn field_from_text(text: &str, origin: &str, spec: &FieldSpec) -> CliResult<RadialField> {
    let cols = parse_columns(text, origin)?;
    let first = cols.radii.first().copied();
    let field =
        RadialField::from_columns(spec.params, spec.nonlinearity, cols, spec.regular, spec.tolerance).map_err(|e| {
            CliError::Input {
                path: origin.to_string(),
                reason: e.to_string(),
            }
        })?;
    Ok(match (spec.regular, first) {
        (true, Some(r0)) if r0 > 0.0 => field.with_taylor_start(r0),
        _ => field,
    })
}

pub fn read_field(path: &Path, spec: &FieldSpec) -> CliResult<RadialField> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    field_from_text(&text, &path.display().to_string(), spec)
}
