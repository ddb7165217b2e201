//! Lie brackets of point vector fields, spans in a shared monomial frame,
//! closure with structure constants, and the generators of the flat algebra.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jet::JetContext;
use crate::linalg::{rank, Echelon};
use crate::poly::Monomial;
use crate::prolong::VectorField;
use crate::scalar::GaussScalar;

/// `[X, Y]` with coefficients `X(Y_c) - Y(X_c)`.
pub fn bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let comps: Vec<_> = x
        .components()
        .zip(y.components())
        .map(|(xc, yc)| &x.apply(yc) - &y.apply(xc))
        .collect();
    let mut theta = comps;
    let eta = theta.split_off(x.ctx().n());
    VectorField::new(x.ctx(), theta, eta).expect("bracket of point fields is a point field")
}

/// Column index for each `(component, monomial)` that occurs in some field.
#[derive(Clone, Debug, Default)]
pub struct Frame {
    columns: BTreeMap<(usize, Monomial), usize>,
}

impl Frame {
    pub fn of<'a>(fields: impl IntoIterator<Item = &'a VectorField>) -> Frame {
        let mut keys: Vec<(usize, Monomial)> = Vec::new();
        for f in fields {
            for (c, p) in f.components().enumerate() {
                keys.extend(p.terms().map(|(m, _)| (c, m.clone())));
            }
        }
        keys.sort();
        keys.dedup();
        Frame { columns: keys.into_iter().enumerate().map(|(k, key)| (key, k)).collect() }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Coordinates of `f`; every monomial of `f` must be in the frame.
    pub fn coordinates(&self, f: &VectorField) -> Vec<GaussScalar> {
        let mut v = vec![GaussScalar::zero(); self.len()];
        for (c, p) in f.components().enumerate() {
            for (m, coeff) in p.terms() {
                let col = self.columns[&(c, m.clone())];
                v[col] = coeff.clone();
            }
        }
        v
    }

    fn field(&self, ctx: &JetContext, v: &[GaussScalar]) -> VectorField {
        let t = ctx.table();
        let mut comps = vec![ctx.zero(); ctx.n() + ctx.m()];
        for ((c, m), &col) in &self.columns {
            if !v[col].is_zero() {
                comps[*c] = &comps[*c] + &crate::poly::Poly::term(t, m.clone(), v[col].clone());
            }
        }
        let eta = comps.split_off(ctx.n());
        VectorField::new(ctx, comps, eta).expect("frame monomials are point monomials")
    }
}

/// Exact rank of the coefficient matrix of `fields`.
pub fn span_dimension(fields: &[VectorField]) -> usize {
    let frame = Frame::of(fields);
    let rows: Vec<_> = fields.iter().map(|f| frame.coordinates(f)).collect();
    rank(&rows, frame.len())
}

/// True when both families span the same space.
pub fn same_span(a: &[VectorField], b: &[VectorField]) -> bool {
    let frame = Frame::of(a.iter().chain(b));
    let ra: Vec<_> = a.iter().map(|f| frame.coordinates(f)).collect();
    let rb: Vec<_> = b.iter().map(|f| frame.coordinates(f)).collect();
    crate::linalg::same_row_span(&ra, &rb, frame.len())
}

/// Linearly independent named fields.
#[derive(Clone, Debug)]
pub struct FieldBasis {
    fields: Vec<VectorField>,
    names: Vec<String>,
}

impl FieldBasis {
    pub fn new(fields: Vec<VectorField>) -> Result<Self> {
        let names = (1..=fields.len()).map(|k| format!("X{k}")).collect();
        Self::named(fields, names)
    }

    pub fn named(fields: Vec<VectorField>, names: Vec<String>) -> Result<Self> {
        if names.len() != fields.len() {
            return Err(Error::ShapeMismatch(format!("{} names for {} fields", names.len(), fields.len())));
        }
        if let Some(f) = fields.iter().find(|f| f.ctx() != fields[0].ctx()) {
            return Err(Error::ShapeMismatch(format!("field {f} uses a different context")));
        }
        let r = span_dimension(&fields);
        if r != fields.len() {
            return Err(Error::DependentBasis { rank: r, count: fields.len() });
        }
        Ok(FieldBasis { fields, names })
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn frame(&self) -> Frame {
        Frame::of(&self.fields)
    }

    /// Rows of the coordinate matrix in the basis' own frame.
    pub fn coordinate_matrix(&self) -> Vec<Vec<GaussScalar>> {
        let frame = self.frame();
        self.fields.iter().map(|f| frame.coordinates(f)).collect()
    }
}

/// Basis of the symmetry algebra of `u_xx = 0`, in the order
/// `U_k, V_μ, W_jk, A_νk, B_kμ, C_νμ, X_j, Y_ν`.
pub fn flat_generators(n: usize, m: usize) -> Result<FieldBasis> {
    let ctx = JetContext::new(n, m)?;
    let (x, u) = (|i| ctx.x(i), |mu| ctx.u(mu));
    let field = |theta: Vec<_>, eta: Vec<_>| VectorField::new(&ctx, theta, eta).expect("point field");
    let only_theta = |k: usize, c: crate::poly::Poly| {
        let mut th = vec![ctx.zero(); n];
        th[k] = c;
        field(th, vec![ctx.zero(); m])
    };
    let only_eta = |mu: usize, c: crate::poly::Poly| {
        let mut et = vec![ctx.zero(); m];
        et[mu] = c;
        field(vec![ctx.zero(); n], et)
    };
    let one = crate::poly::Poly::one(ctx.table());
    let mut fields = Vec::new();
    let mut names = Vec::new();
    for k in 0..n {
        fields.push(only_theta(k, one.clone()));
        names.push(format!("U{}", k + 1));
    }
    for mu in 0..m {
        fields.push(only_eta(mu, one.clone()));
        names.push(format!("V{}", mu + 1));
    }
    for j in 0..n {
        for k in 0..n {
            fields.push(only_theta(k, x(j)));
            names.push(format!("W{}{}", j + 1, k + 1));
        }
    }
    for nu in 0..m {
        for k in 0..n {
            fields.push(only_theta(k, u(nu)));
            names.push(format!("A{}{}", nu + 1, k + 1));
        }
    }
    for k in 0..n {
        for mu in 0..m {
            fields.push(only_eta(mu, x(k)));
            names.push(format!("B{}{}", k + 1, mu + 1));
        }
    }
    for nu in 0..m {
        for mu in 0..m {
            fields.push(only_eta(mu, u(nu)));
            names.push(format!("C{}{}", nu + 1, mu + 1));
        }
    }
    for j in 0..n {
        let theta = (0..n).map(|k| &x(j) * &x(k)).collect();
        let eta = (0..m).map(|mu| &x(j) * &u(mu)).collect();
        fields.push(field(theta, eta));
        names.push(format!("X{}", j + 1));
    }
    for nu in 0..m {
        let theta = (0..n).map(|k| &x(k) * &u(nu)).collect();
        let eta = (0..m).map(|mu| &u(nu) * &u(mu)).collect();
        fields.push(field(theta, eta));
        names.push(format!("Y{}", nu + 1));
    }
    FieldBasis::named(fields, names)
}

/// `table[a][b][c]` is the coefficient of basis field `c` in `[X_a, X_b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureConstants {
    pub names: Vec<String>,
    pub table: Vec<Vec<Vec<GaussScalar>>>,
}

impl StructureConstants {
    /// Nonzero constants as `(a, b, c, value)` with `a < b`.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, GaussScalar)> {
        let k = self.names.len();
        let mut out = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                for (c, v) in self.table[a][b].iter().enumerate() {
                    if !v.is_zero() {
                        out.push((a, b, c, v.clone()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Closure {
    Closes(StructureConstants),
    /// `[X_a, X_b]` is outside the span; `residual` is its reduction modulo the basis.
    Fails { a: usize, b: usize, bracket: VectorField, residual: VectorField },
}

impl Closure {
    pub fn closes(&self) -> bool {
        matches!(self, Closure::Closes(_))
    }
}

/// Expands every bracket of basis fields in the basis, or reports the first
/// pair `(a, b)`, `a < b`, whose bracket leaves the span.
pub fn closure_check(basis: &FieldBasis) -> Closure {
    let k = basis.len();
    let fields = basis.fields();
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pairs.push((a, b, bracket(&fields[a], &fields[b])));
        }
    }
    let frame = Frame::of(fields.iter().chain(pairs.iter().map(|(_, _, f)| f)));
    let coords: Vec<Vec<GaussScalar>> = fields.iter().map(|f| frame.coordinates(f)).collect();
    // Solve Σ c_a X_a = [X_a, X_b] for all pairs at once: columns are basis fields.
    let transposed: Vec<Vec<GaussScalar>> =
        (0..frame.len()).map(|r| coords.iter().map(|row| row[r].clone()).collect()).collect();
    let targets: Vec<Vec<GaussScalar>> = pairs.iter().map(|(_, _, f)| frame.coordinates(f)).collect();
    let rhs: Vec<Vec<GaussScalar>> =
        (0..frame.len()).map(|r| targets.iter().map(|t| t[r].clone()).collect()).collect();
    let ech = Echelon::new(transposed, rhs, k);

    let mut table = vec![vec![vec![GaussScalar::zero(); k]; k]; k];
    for (q, (a, b, f)) in pairs.iter().enumerate() {
        if ech.inconsistent_row(q).is_some() {
            let reduced = Echelon::new(coords.clone(), vec![vec![]; k], frame.len());
            let mut v = frame.coordinates(f);
            for (row, &p) in reduced.pivots.iter().enumerate() {
                if !v[p].is_zero() {
                    let c = v[p].clone();
                    for (vi, ri) in v.iter_mut().zip(&reduced.rows[row]) {
                        if !ri.is_zero() {
                            *vi -= &(&c * ri);
                        }
                    }
                }
            }
            return Closure::Fails { a: *a, b: *b, bracket: f.clone(), residual: frame.field(f.ctx(), &v) };
        }
        let c = ech.particular(q);
        table[*b][*a] = c.iter().map(|v| -v).collect();
        table[*a][*b] = c;
    }
    Closure::Closes(StructureConstants { names: basis.names().to_vec(), table })
}
