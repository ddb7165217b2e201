//! Input documents: system files, field files, points and initial data.

use std::fs;
use std::io::Read;

use serde::Deserialize;

use jetsym::expr::parse_poly;
use jetsym::jet::{JetContext, PDESystem};
use jetsym::prolong::VectorField;
use jetsym::GaussScalar;

use crate::CliError;

/// Reads `-` from stdin, inline JSON as is, anything else as a path.
pub fn load(arg: &str, stdin: &mut dyn Read) -> Result<String, CliError> {
    let trimmed = arg.trim_start();
    if arg == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s).map_err(|e| CliError::Domain(format!("reading stdin: {e}")))?;
        Ok(s)
    } else if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Domain(format!("{arg}: {e}")))
    }
}

fn json<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Domain(format!("invalid {what}: {e}")))
}

#[derive(Deserialize)]
struct EntryDoc {
    k: usize,
    i: usize,
    j: usize,
    #[serde(rename = "F")]
    f: String,
}

#[derive(Deserialize)]
struct SystemDoc {
    n: usize,
    m: usize,
    #[serde(default)]
    entries: Vec<EntryDoc>,
}

fn one_based(v: usize, max: usize, name: &str) -> Result<usize, CliError> {
    if v == 0 || v > max {
        return Err(CliError::Domain(format!("{name} = {v} out of range 1..={max}")));
    }
    Ok(v - 1)
}

/// `{"n", "m", "entries": [{"k", "i", "j", "F"}]}`, indices one-based with `i ≤ j`.
pub fn system(text: &str) -> Result<PDESystem, CliError> {
    let doc: SystemDoc = json(text, "system file")?;
    let ctx = JetContext::new(doc.n, doc.m)?;
    let mut entries = Vec::with_capacity(doc.entries.len());
    for e in &doc.entries {
        if e.i > e.j {
            return Err(CliError::Domain(format!("entry (k={}, i={}, j={}) needs i <= j", e.k, e.i, e.j)));
        }
        let f = parse_poly(&e.f, ctx.table()).map_err(|err| CliError::Domain(format!("entry (k={}, i={}, j={}): {err}", e.k, e.i, e.j)))?;
        entries.push((one_based(e.k, doc.m, "k")?, one_based(e.i, doc.n, "i")?, one_based(e.j, doc.n, "j")?, f));
    }
    Ok(PDESystem::new(&ctx, entries)?)
}

#[derive(Deserialize)]
struct Components {
    theta: Vec<String>,
    eta: Vec<String>,
}

#[derive(Deserialize)]
struct FieldDoc {
    n: usize,
    m: usize,
    #[serde(flatten)]
    comps: Components,
}

#[derive(Deserialize)]
struct FieldsDoc {
    n: usize,
    m: usize,
    fields: Vec<Components>,
}

fn build_field(ctx: &JetContext, c: &Components) -> Result<VectorField, CliError> {
    let parse = |v: &Vec<String>| v.iter().map(|s| parse_poly(s, ctx.table())).collect::<Result<Vec<_>, _>>();
    Ok(VectorField::new(ctx, parse(&c.theta)?, parse(&c.eta)?)?)
}

/// `{"n", "m", "theta": [...], "eta": [...]}`.
pub fn field(text: &str) -> Result<VectorField, CliError> {
    let doc: FieldDoc = json(text, "field file")?;
    build_field(&JetContext::new(doc.n, doc.m)?, &doc.comps)
}

/// `{"n", "m", "fields": [{"theta", "eta"}, ...]}`.
pub fn fields(text: &str) -> Result<Vec<VectorField>, CliError> {
    let doc: FieldsDoc = json(text, "fields file")?;
    let ctx = JetContext::new(doc.n, doc.m)?;
    doc.fields.iter().map(|c| build_field(&ctx, c)).collect()
}

fn scalar(s: &str) -> Result<GaussScalar, CliError> {
    s.parse().map_err(|e: jetsym::Error| CliError::Domain(e.to_string()))
}

/// Comma-separated scalars, or the origin when absent.
pub fn point(arg: Option<&str>, dim: usize) -> Result<Vec<GaussScalar>, CliError> {
    let Some(arg) = arg else {
        return Ok(vec![GaussScalar::zero(); dim]);
    };
    let values = arg.split(',').map(scalar).collect::<Result<Vec<_>, _>>()?;
    if values.len() != dim {
        return Err(CliError::Domain(format!("--point has {} coordinates, expected {dim}", values.len())));
    }
    Ok(values)
}

/// Flat JSON array of scalar strings in `(α, β, γ, δ, ε)` order.
pub fn initial_data(text: &str) -> Result<Vec<GaussScalar>, CliError> {
    let raw: Vec<String> = json(text, "initial data")?;
    raw.iter().map(|s| scalar(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_document() {
        let sys = system(r#"{"n": 2, "m": 1, "entries": [{"k": 1, "i": 1, "j": 2, "F": "p1_1*p1_2"}]}"#).unwrap();
        assert_eq!(sys.f(0, 1, 0), &sys.ctx().p(0, 0) * &sys.ctx().p(0, 1));
        assert!(system(r#"{"n": 2, "m": 1, "entries": [{"k": 1, "i": 2, "j": 1, "F": "0"}]}"#).is_err());
        assert!(system(r#"{"n": 1, "m": 1, "entries": [{"k": 2, "i": 1, "j": 1, "F": "0"}]}"#).is_err());
        assert!(system(r#"{"n": 1, "m": 1}"#).unwrap().is_flat());
    }

    #[test]
    fn points_and_data() {
        assert_eq!(point(None, 2).unwrap(), vec![GaussScalar::zero(); 2]);
        assert_eq!(point(Some("1/2,i"), 2).unwrap(), vec![GaussScalar::from_ratio(1, 2), GaussScalar::i()]);
        assert!(point(Some("1"), 2).is_err());
        assert_eq!(initial_data(r#"["1", "-3/2*i"]"#).unwrap().len(), 2);
    }
}
