//! Canonical JSON rendering. Keys are sorted, polynomials list their terms in
//! graded-lex order, scalars are strings in the `a/b+c/d*i` form.

use serde_json::{json, Value};

use jetsym::prolong::VectorField;
use jetsym::{GaussScalar, Poly};

pub fn scalar(c: &GaussScalar) -> Value {
    Value::String(c.to_string())
}

pub fn scalars(v: &[GaussScalar]) -> Value {
    Value::Array(v.iter().map(scalar).collect())
}

pub fn poly(p: &Poly) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| {
            let mono = Poly::term(p.table(), m.clone(), GaussScalar::one());
            json!({ "monomial": mono.to_string(), "coefficient": scalar(c) })
        })
        .collect();
    json!({
        "expr": p.to_string(),
        "terms": terms,
        "exact_through": p.truncation(),
    })
}

pub fn field(f: &VectorField) -> Value {
    json!({
        "theta": f.theta().iter().map(poly).collect::<Vec<_>>(),
        "eta": f.eta().iter().map(poly).collect::<Vec<_>>(),
        "text": f.to_string(),
    })
}
