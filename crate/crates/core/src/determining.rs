//! Determining equations for infinitesimal point symmetries and the two ways
//! of solving them.
//!
//! The symmetry coefficients `θ_j, η^μ` are replaced by polynomials of degree
//! `≤ N` in local coordinates around a base point, one unknown per Taylor
//! coefficient. Each Lie-criterion residual is affine-linear in those
//! unknowns; its coefficient on every monomial `x^a u^b · (first jets)^c`
//! with `|a| + |b| ≤ N - 2` gives one exact linear equation.
//!
//! * [`symmetry_algebra`] takes the nullspace of the whole system at once.
//! * [`taylor_from_initial_data`] walks the layers instead: the equations
//!   whose `(x, u)`-degree is `d - 2` fix the degree-`d` Taylor coefficients
//!   from the lower ones, starting from the initial data
//!   `ω = (α, β, γ, δ, ε)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{JetContext, PDESystem};
use crate::linalg::{Echelon, LinearSystemExact};
use crate::poly::{Monomial, Poly};
use crate::prolong::{lie_criterion_check, VectorField};
use crate::scalar::GaussScalar;

pub const DEFAULT_ORDER: u32 = 3;

fn factorial(k: u16) -> GaussScalar {
    GaussScalar::from((1..=k as i64).product::<i64>())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent vectors over `vars` variables of total degree exactly `d`, in
/// descending lexicographic order (`x1^2, x1*x2, ...`).
fn exponents_of_degree(vars: usize, d: u32) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; vars];
    fn rec(k: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if k + 1 == cur.len() {
            cur[k] = left as u16;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[k] = e as u16;
            rec(k + 1, left - e, cur, out);
        }
        cur[k] = 0;
    }
    if vars > 0 {
        rec(0, d, &mut cur, &mut out);
    }
    out
}

/// Which coefficient of the field an unknown belongs to: `0..n` are `θ_j`,
/// `n..n+m` are `η^μ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unknown {
    pub component: usize,
    /// Exponents over the `n + m` base variables.
    pub exponent: Vec<u16>,
}

impl Unknown {
    pub fn degree(&self) -> u32 {
        self.exponent.iter().map(|&e| e as u32).sum()
    }

    /// `α!` for the exponent `α`: the ratio derivative / Taylor coefficient.
    pub fn derivative_scale(&self) -> GaussScalar {
        self.exponent.iter().fold(GaussScalar::one(), |acc, &e| &acc * &factorial(e))
    }
}

/// Base point in `(x, u)` space.
pub type BasePoint = Vec<GaussScalar>;

/// The polynomial ansatz for `(θ, η)` with one unknown per Taylor coefficient.
#[derive(Clone, Debug)]
pub struct UnknownCoefficientField {
    ctx: JetContext,
    point: BasePoint,
    order: u32,
    unknowns: Vec<Unknown>,
    index: HashMap<Unknown, usize>,
}

impl UnknownCoefficientField {
    /// Unknowns are ordered by degree, then component, then descending lex monomial.
    pub fn new(ctx: &JetContext, point: BasePoint, order: u32) -> Result<Self> {
        let base = ctx.n() + ctx.m();
        if point.len() != base {
            return Err(Error::ShapeMismatch(format!("base point has {} coordinates, expected {}", point.len(), base)));
        }
        let mut unknowns = Vec::new();
        for d in 0..=order {
            let monos = exponents_of_degree(base, d);
            for component in 0..base {
                for e in &monos {
                    unknowns.push(Unknown { component, exponent: e.clone() });
                }
            }
        }
        let index = unknowns.iter().cloned().enumerate().map(|(k, u)| (u, k)).collect();
        Ok(UnknownCoefficientField { ctx: ctx.clone(), point, order, unknowns, index })
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn point(&self) -> &BasePoint {
        &self.point
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn unknowns(&self) -> &[Unknown] {
        &self.unknowns
    }

    pub fn len(&self) -> usize {
        self.unknowns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unknowns.is_empty()
    }

    /// `(n + m) · C(N + n + m, n + m)`.
    pub fn expected_count(n: usize, m: usize, order: u32) -> usize {
        let b = (n + m) as u64;
        (b * binomial(order as u64 + b, b)) as usize
    }

    pub fn index_of(&self, u: &Unknown) -> Option<usize> {
        self.index.get(u).copied()
    }

    fn component_name(&self, c: usize) -> String {
        let n = self.ctx.n();
        if c < n {
            format!("theta{}", c + 1)
        } else {
            format!("eta{}", c - n + 1)
        }
    }

    fn base_monomial_name(&self, exponent: &[u16]) -> String {
        let t = self.ctx.table();
        let parts: Vec<String> = exponent
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, &e)| if e == 1 { t.name(k) } else { format!("{}^{}", t.name(k), e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Taylor-coefficient label, e.g. `theta1[x1^2]`.
    pub fn label(&self, k: usize) -> String {
        let u = &self.unknowns[k];
        format!("{}[{}]", self.component_name(u.component), self.base_monomial_name(&u.exponent))
    }

    /// Derivative label, e.g. `theta1_x1x1` or `eta1` for a value.
    pub fn derivative_label(&self, k: usize) -> String {
        let u = &self.unknowns[k];
        let t = self.ctx.table();
        let mut s = self.component_name(u.component);
        if u.degree() > 0 {
            s.push('_');
            for (v, &e) in u.exponent.iter().enumerate() {
                for _ in 0..e {
                    s.push_str(&t.name(v));
                }
            }
        }
        s
    }

    fn monomial_poly(&self, exponent: &[u16]) -> Poly {
        let t = self.ctx.table();
        let mut exps = vec![0u16; t.len()];
        exps[..exponent.len()].copy_from_slice(exponent);
        Poly::term(t, Monomial::from_exponents(exps), GaussScalar::one())
    }

    /// The field in local coordinates for a given assignment of the unknowns.
    pub fn local_field(&self, values: &[GaussScalar]) -> VectorField {
        assert_eq!(values.len(), self.unknowns.len());
        let n = self.ctx.n();
        let mut comps = vec![self.ctx.zero(); n + self.ctx.m()];
        for (u, v) in self.unknowns.iter().zip(values) {
            if !v.is_zero() {
                comps[u.component] = &comps[u.component] + &self.monomial_poly(&u.exponent).scale(v);
            }
        }
        let eta = comps.split_off(n);
        VectorField::new(&self.ctx, comps, eta).expect("ansatz fields are point fields")
    }

    /// The field in the original coordinates.
    pub fn field(&self, values: &[GaussScalar]) -> VectorField {
        from_local(&self.local_field(values), &self.point)
    }

    /// Field whose only nonzero unknown is `k`, in local coordinates.
    pub fn unit_local_field(&self, k: usize) -> VectorField {
        let mut values = vec![GaussScalar::zero(); self.unknowns.len()];
        values[k] = GaussScalar::one();
        self.local_field(&values)
    }

    /// Taylor coefficients of a polynomial field at the base point, truncated at the ansatz order.
    pub fn coordinates_of(&self, field: &VectorField) -> Vec<GaussScalar> {
        let local = to_local(field, &self.point);
        let t = self.ctx.table();
        let base = self.ctx.n() + self.ctx.m();
        let comps: Vec<&Poly> = local.components().collect();
        self.unknowns
            .iter()
            .map(|u| {
                let mut exps = vec![0u16; t.len()];
                exps[..base].copy_from_slice(&u.exponent);
                comps[u.component].coeff(&Monomial::from_exponents(exps))
            })
            .collect()
    }
}

fn shift_bindings(ctx: &JetContext, point: &[GaussScalar], sign: i64) -> Vec<(usize, Poly)> {
    let t = ctx.table();
    point
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| (k, &Poly::var(t, k) + &Poly::constant(t, v.scale_int(sign))))
        .collect()
}

trait ScaleInt {
    fn scale_int(&self, k: i64) -> GaussScalar;
}

impl ScaleInt for GaussScalar {
    fn scale_int(&self, k: i64) -> GaussScalar {
        self * &GaussScalar::from(k)
    }
}

/// `f(x) ↦ f(x + x₀)`: coordinates centred at the base point.
fn to_local(field: &VectorField, point: &[GaussScalar]) -> VectorField {
    let b = shift_bindings(field.ctx(), point, 1);
    if b.is_empty() {
        return field.clone();
    }
    field.map(|p| p.substitute(&b).expect("polynomial shift"))
}

fn from_local(field: &VectorField, point: &[GaussScalar]) -> VectorField {
    let b = shift_bindings(field.ctx(), point, -1);
    if b.is_empty() {
        return field.clone();
    }
    field.map(|p| p.substitute(&b).expect("polynomial shift"))
}

/// The system with `x ← x + x₀, u ← u + u₀` substituted into every entry.
pub fn translate_system(sys: &PDESystem, point: &[GaussScalar]) -> Result<PDESystem> {
    let ctx = sys.ctx();
    let b = shift_bindings(ctx, point, 1);
    if b.is_empty() {
        return Ok(sys.clone());
    }
    let entries = sys
        .entries()
        .map(|(&(k, i, j), f)| Ok((k, i, j, f.substitute(&b)?)))
        .collect::<Result<Vec<_>>>()?;
    PDESystem::new(ctx, entries)
}

/// Origin of one determining equation: the coefficient of
/// `base_monomial · jet_monomial` in the residual for `(mu, i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct RowOrigin {
    pub base_degree: u32,
    pub mu: usize,
    pub i: usize,
    pub j: usize,
    pub jet_monomial: Monomial,
    pub base_monomial: Monomial,
}

/// Homogeneous linear system over the Taylor-coefficient unknowns.
#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub field: UnknownCoefficientField,
    pub sys: LinearSystemExact,
    pub provenance: Vec<RowOrigin>,
}

impl DeterminingSystem {
    pub fn rows(&self) -> usize {
        self.sys.rows()
    }

    /// Row `r` rewritten over derivative unknowns: `(label, coefficient)` pairs.
    pub fn row_in_derivatives(&self, r: usize) -> Vec<(String, GaussScalar)> {
        self.sys.matrix[r]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let scale = self.field.unknowns[k].derivative_scale();
                (self.field.derivative_label(k), c / &scale)
            })
            .collect()
    }

    /// Human-readable provenance of row `r`.
    pub fn describe_row(&self, r: usize) -> String {
        let o = &self.provenance[r];
        let t = self.field.ctx.table();
        let name = |m: &Monomial| {
            let p = Poly::term(t, m.clone(), GaussScalar::one());
            p.to_string()
        };
        format!(
            "mu={}, (i,j)=({},{}), coefficient of [{}] * [{}]",
            o.mu + 1,
            o.i + 1,
            o.j + 1,
            name(&o.base_monomial),
            name(&o.jet_monomial)
        )
    }

    /// Equation `r` as text, over derivative unknowns.
    pub fn equation_text(&self, r: usize) -> String {
        let terms = self.row_in_derivatives(r);
        let mut s = String::new();
        for (n, (label, c)) in terms.iter().enumerate() {
            let neg = c.is_real() && c.re() < &num_rational::BigRational::from_integer(0.into());
            let mag = if neg { -c } else { c.clone() };
            let coef = if mag.is_one() {
                String::new()
            } else if mag.is_real() {
                format!("{}*", mag)
            } else {
                format!("({})*", mag)
            };
            match (n, neg) {
                (0, false) => s.push_str(&format!("{coef}{label}")),
                (0, true) => s.push_str(&format!("-{coef}{label}")),
                (_, false) => s.push_str(&format!(" + {coef}{label}")),
                (_, true) => s.push_str(&format!(" - {coef}{label}")),
            }
        }
        s.push_str(" = 0");
        s
    }
}

/// Assembles every determining equation for the degree-`≤ N` ansatz.
///
/// Truncated series entries must be known through total degree `N + 2`
/// so that all equations up to `(x, u)`-degree `N - 2` are exact.
pub fn generate_determining(sys: &PDESystem, field: &UnknownCoefficientField) -> Result<DeterminingSystem> {
    let ctx = sys.ctx();
    if ctx.table() != field.ctx.table() {
        return Err(Error::ShapeMismatch("system and ansatz use different contexts".into()));
    }
    let local = translate_system(sys, &field.point)?;
    let order = field.order;
    let base = ctx.n() + ctx.m();

    let mut residuals = Vec::with_capacity(field.len());
    let mut exact_through: Option<i32> = None;
    for k in 0..field.len() {
        let res = lie_criterion_check(&field.unit_local_field(k), &local)?;
        for r in res.values() {
            if let Some(t) = r.truncation() {
                exact_through = Some(exact_through.map_or(t, |e| e.min(t)));
            }
        }
        residuals.push(res);
    }
    if let Some(t) = exact_through {
        // principal rows: (x,u)-degree N-2 times cubic jet monomials
        let needed = order as i32 + 1;
        if t < needed {
            let got = local.truncation().unwrap_or(t);
            return Err(Error::TruncationTooSmall { needed: order + 2, got: got.max(0) as u32 });
        }
    }

    let max_base = order as i32 - 2;
    let mut rows: BTreeMap<RowOrigin, Vec<(usize, GaussScalar)>> = BTreeMap::new();
    for (k, res) in residuals.iter().enumerate() {
        for (&(mu, i, j), r) in res {
            for (mono, c) in r.terms() {
                if exact_through.is_some_and(|t| mono.degree() as i32 > t) {
                    continue;
                }
                let (base_mono, jet_mono) = mono.split(|v| v < base);
                if base_mono.degree() as i32 > max_base {
                    continue;
                }
                let origin = RowOrigin {
                    base_degree: base_mono.degree(),
                    mu,
                    i,
                    j,
                    jet_monomial: jet_mono,
                    base_monomial: base_mono,
                };
                rows.entry(origin).or_default().push((k, c.clone()));
            }
        }
    }

    let cols = field.len();
    let mut matrix = Vec::with_capacity(rows.len());
    let mut provenance = Vec::with_capacity(rows.len());
    for (origin, entries) in rows {
        let mut row = vec![GaussScalar::zero(); cols];
        for (k, c) in entries {
            row[k] += &c;
        }
        if row.iter().any(|c| !c.is_zero()) {
            matrix.push(row);
            provenance.push(origin);
        }
    }
    let labels = (0..cols).map(|k| field.label(k)).collect();
    let rhs = vec![GaussScalar::zero(); matrix.len()];
    Ok(DeterminingSystem { field: field.clone(), sys: LinearSystemExact::new(matrix, rhs, labels)?, provenance })
}

/// Initial data `ω = (α, β, γ, δ, ε)` of a field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialData {
    /// `α[j][l] = ∂θ_j/∂w_l`.
    pub alpha: Vec<Vec<GaussScalar>>,
    /// `β[k][l] = ∂η^k/∂w_l`.
    pub beta: Vec<Vec<GaussScalar>>,
    /// `γ[l] = ∂²θ_1/∂x_1∂w_l`.
    pub gamma: Vec<GaussScalar>,
    /// `δ[k] = η^k`.
    pub delta: Vec<GaussScalar>,
    /// `ε[j] = θ_j`.
    pub epsilon: Vec<GaussScalar>,
}

impl InitialData {
    /// `(n + m + 2)(n + m)`.
    pub fn len_for(n: usize, m: usize) -> usize {
        (n + m + 2) * (n + m)
    }

    pub fn zero(n: usize, m: usize) -> Self {
        let b = n + m;
        let z = GaussScalar::zero;
        InitialData {
            alpha: vec![vec![z(); b]; n],
            beta: vec![vec![z(); b]; m],
            gamma: vec![z(); b],
            delta: vec![z(); m],
            epsilon: vec![z(); n],
        }
    }

    /// Flattened in the order `α, β, γ, δ, ε`.
    pub fn to_vec(&self) -> Vec<GaussScalar> {
        let mut v: Vec<GaussScalar> = self.alpha.iter().flatten().cloned().collect();
        v.extend(self.beta.iter().flatten().cloned());
        v.extend(self.gamma.iter().cloned());
        v.extend(self.delta.iter().cloned());
        v.extend(self.epsilon.iter().cloned());
        v
    }

    pub fn from_vec(n: usize, m: usize, v: &[GaussScalar]) -> Result<Self> {
        let expected = Self::len_for(n, m);
        if v.len() != expected {
            return Err(Error::InitialDataLength { expected, got: v.len() });
        }
        let b = n + m;
        let mut it = v.iter().cloned();
        let mut take = |k: usize| -> Vec<GaussScalar> { (&mut it).take(k).collect() };
        let alpha = (0..n).map(|_| take(b)).collect();
        let beta = (0..m).map(|_| take(b)).collect();
        let gamma = take(b);
        let delta = take(m);
        let epsilon = take(n);
        Ok(InitialData { alpha, beta, gamma, delta, epsilon })
    }

    /// Reads `ω` off a polynomial field at `point`.
    pub fn of_field(field: &VectorField, point: &[GaussScalar]) -> Result<Self> {
        let ctx = field.ctx();
        let (n, m) = (ctx.n(), ctx.m());
        let ansatz = UnknownCoefficientField::new(ctx, point.to_vec(), 2)?;
        let coords = ansatz.coordinates_of(field);
        let b = n + m;
        let get = |component: usize, exponent: Vec<u16>| -> GaussScalar {
            let u = Unknown { component, exponent };
            &coords[ansatz.index_of(&u).expect("ansatz unknown")] * &u.derivative_scale()
        };
        let unit = |l: usize| -> Vec<u16> {
            let mut e = vec![0u16; b];
            e[l] = 1;
            e
        };
        let mut omega = InitialData::zero(n, m);
        for j in 0..n {
            for l in 0..b {
                omega.alpha[j][l] = get(j, unit(l));
            }
            omega.epsilon[j] = get(j, vec![0; b]);
        }
        for k in 0..m {
            for l in 0..b {
                omega.beta[k][l] = get(n + k, unit(l));
            }
            omega.delta[k] = get(n + k, vec![0; b]);
        }
        for l in 0..b {
            let mut e = unit(l);
            e[0] += 1;
            omega.gamma[l] = get(0, e);
        }
        Ok(omega)
    }
}

/// Position of each `ω` component as `(unknown, derivative scale)`.
fn omega_slots(field: &UnknownCoefficientField) -> Vec<Unknown> {
    let (n, m) = (field.ctx.n(), field.ctx.m());
    let b = n + m;
    let unit = |l: usize| -> Vec<u16> {
        let mut e = vec![0u16; b];
        e[l] = 1;
        e
    };
    let mut slots = Vec::with_capacity(InitialData::len_for(n, m));
    for j in 0..n {
        for l in 0..b {
            slots.push(Unknown { component: j, exponent: unit(l) });
        }
    }
    for k in 0..m {
        for l in 0..b {
            slots.push(Unknown { component: n + k, exponent: unit(l) });
        }
    }
    for l in 0..b {
        let mut e = unit(l);
        e[0] += 1;
        slots.push(Unknown { component: 0, exponent: e });
    }
    for k in 0..m {
        slots.push(Unknown { component: n + k, exponent: vec![0; b] });
    }
    for j in 0..n {
        slots.push(Unknown { component: j, exponent: vec![0; b] });
    }
    slots
}

/// An affine expression `Σ γ-coefficients · γ + Σ Ω-coefficients · Ω`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineForm {
    /// Coefficient of each `γ_l`.
    pub gamma: Vec<GaussScalar>,
    /// `(row, coefficient)` over the right-hand sides `Ω_row` of the selected rows.
    pub omega: Vec<(usize, GaussScalar)>,
}

/// One second derivative at the base point, solved in terms of `(γ, Ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderEntry {
    pub unknown: Unknown,
    pub label: String,
    pub form: AffineForm,
}

/// The solved second-order layer.
#[derive(Clone, Debug)]
pub struct SecondOrderSolution {
    pub entries: Vec<SecondOrderEntry>,
    /// Rows forming the invertible square subsystem, in selection order.
    pub selected_rows: Vec<usize>,
    /// `Ω_row` as a linear form over the first-order data: `(label, coefficient)`.
    pub omega: BTreeMap<usize, Vec<(String, GaussScalar)>>,
}

impl SecondOrderSolution {
    /// Evaluates every second derivative for concrete `γ` and first-order data.
    pub fn evaluate(&self, gamma: &[GaussScalar], omega_values: &BTreeMap<usize, GaussScalar>) -> Vec<GaussScalar> {
        self.entries
            .iter()
            .map(|e| {
                let mut acc = GaussScalar::zero();
                for (g, c) in gamma.iter().zip(&e.form.gamma) {
                    acc += &(g * c);
                }
                for (r, c) in &e.form.omega {
                    if let Some(v) = omega_values.get(r) {
                        acc += &(v * c);
                    }
                }
                acc
            })
            .collect()
    }
}

/// Expresses every second derivative of `θ_j, η^μ` at the base point as an
/// affine combination of the `γ` slice and the right-hand sides `Ω` of a
/// deterministically chosen invertible square subsystem of the
/// `(x, u)`-degree-0 equations.
pub fn solve_second_order(det: &DeterminingSystem) -> Result<SecondOrderSolution> {
    let field = &det.field;
    if field.order < 2 {
        return Err(Error::TruncationTooSmall { needed: 2, got: field.order });
    }
    let b = field.ctx.n() + field.ctx.m();
    let layer2: Vec<usize> = (0..field.len()).filter(|&k| field.unknowns[k].degree() == 2).collect();
    let gamma_slots: Vec<usize> = (0..b)
        .map(|l| {
            let mut e = vec![0u16; b];
            e[0] += 1;
            e[l] += 1;
            field.index_of(&Unknown { component: 0, exponent: e }).expect("gamma unknown")
        })
        .collect();
    let free: Vec<usize> = layer2.iter().copied().filter(|k| !gamma_slots.contains(k)).collect();
    let rows0: Vec<usize> = (0..det.rows()).filter(|&r| det.provenance[r].base_degree == 0).collect();

    // rows over derivative unknowns: entry / α!
    let deriv = |r: usize, k: usize| -> GaussScalar {
        let c = &det.sys.matrix[r][k];
        if c.is_zero() {
            c.clone()
        } else {
            c / &field.unknowns[k].derivative_scale()
        }
    };

    let mut selected: Vec<usize> = Vec::new();
    let mut rank = 0;
    for &r in &rows0 {
        if rank == free.len() {
            break;
        }
        let mut trial: Vec<Vec<GaussScalar>> =
            selected.iter().map(|&s| free.iter().map(|&k| deriv(s, k)).collect()).collect();
        trial.push(free.iter().map(|&k| deriv(r, k)).collect());
        let new_rank = crate::linalg::rank(&trial, free.len());
        if new_rank > rank {
            selected.push(r);
            rank = new_rank;
        }
    }
    if rank < free.len() {
        let mat: Vec<Vec<GaussScalar>> =
            selected.iter().map(|&s| free.iter().map(|&k| deriv(s, k)).collect()).collect();
        let ech = Echelon::new(mat, vec![vec![]; selected.len()], free.len());
        let missing = ech.free_columns()[0];
        return Err(Error::SingularSubsystem { unknown: field.derivative_label(free[missing]), rows: rows0.len() });
    }

    // M' v' = Ω - P γ, with one rhs column per γ_l and per selected row
    let s = selected.len();
    let mat: Vec<Vec<GaussScalar>> = selected.iter().map(|&r| free.iter().map(|&k| deriv(r, k)).collect()).collect();
    let rhs: Vec<Vec<GaussScalar>> = selected
        .iter()
        .enumerate()
        .map(|(pos, &r)| {
            let mut v: Vec<GaussScalar> = gamma_slots.iter().map(|&g| -deriv(r, g)).collect();
            v.extend((0..s).map(|q| if q == pos { GaussScalar::one() } else { GaussScalar::zero() }));
            v
        })
        .collect();
    let ech = Echelon::new(mat, rhs, free.len());

    let mut forms: HashMap<usize, AffineForm> = HashMap::new();
    for (row, &p) in ech.pivots.iter().enumerate() {
        let v = &ech.rhs[row];
        let gamma = v[..b].to_vec();
        let omega = (0..s).filter(|&q| !v[b + q].is_zero()).map(|q| (selected[q], v[b + q].clone())).collect();
        forms.insert(free[p], AffineForm { gamma, omega });
    }
    for (l, &g) in gamma_slots.iter().enumerate() {
        let gamma = (0..b).map(|q| if q == l { GaussScalar::one() } else { GaussScalar::zero() }).collect();
        forms.insert(g, AffineForm { gamma, omega: vec![] });
    }
    let entries = layer2
        .iter()
        .map(|&k| SecondOrderEntry {
            unknown: field.unknowns[k].clone(),
            label: field.derivative_label(k),
            form: forms.remove(&k).expect("every second derivative solved"),
        })
        .collect();

    // Ω_r = -(terms of row r in the unknowns of degree ≤ 1)
    let omega = selected
        .iter()
        .map(|&r| {
            let terms = (0..field.len())
                .filter(|&k| field.unknowns[k].degree() <= 1 && !det.sys.matrix[r][k].is_zero())
                .map(|k| (field.derivative_label(k), -&det.sys.matrix[r][k]))
                .collect();
            (r, terms)
        })
        .collect();
    Ok(SecondOrderSolution { entries, selected_rows: selected, omega })
}

/// A linear condition `form · ω = 0` that admissible initial data must meet.
#[derive(Clone, Debug, PartialEq)]
pub struct RecursionConstraint {
    pub layer: u32,
    pub row: usize,
    pub form: Vec<GaussScalar>,
}

/// Every Taylor coefficient as a linear form in `ω`, obtained layer by layer.
#[derive(Clone, Debug)]
pub struct TaylorRecursion {
    pub det: DeterminingSystem,
    /// `forms[k] · ω` is unknown `k`.
    pub forms: Vec<Vec<GaussScalar>>,
    pub constraints: Vec<RecursionConstraint>,
}

impl TaylorRecursion {
    /// Runs the recursion symbolically in `ω`.
    pub fn new(sys: &PDESystem, point: BasePoint, order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::TruncationTooSmall { needed: 2, got: order });
        }
        let ctx = sys.ctx();
        let field = UnknownCoefficientField::new(ctx, point, order)?;
        let det = generate_determining(sys, &field)?;
        let len = InitialData::len_for(ctx.n(), ctx.m());
        let cols = field.len();
        let mut forms: Vec<Option<Vec<GaussScalar>>> = vec![None; cols];

        // layers 0, 1 and the γ slice come straight from ω (Taylor coefficient = derivative / α!)
        for (slot, u) in omega_slots(&field).iter().enumerate() {
            let k = field.index_of(u).expect("omega slot");
            let mut f = vec![GaussScalar::zero(); len];
            f[slot] = u.derivative_scale().inv().expect("nonzero factorial");
            forms[k] = Some(f);
        }

        let mut constraints = Vec::new();
        for layer in 2..=order {
            let rows: Vec<usize> = (0..det.rows()).filter(|&r| det.provenance[r].base_degree + 2 == layer).collect();
            let targets: Vec<usize> =
                (0..cols).filter(|&k| field.unknowns[k].degree() == layer && forms[k].is_none()).collect();
            let mut mat = Vec::with_capacity(rows.len());
            let mut rhs = Vec::with_capacity(rows.len());
            for &r in &rows {
                let row = &det.sys.matrix[r];
                if let Some(k) = (0..cols).find(|&k| field.unknowns[k].degree() > layer && !row[k].is_zero()) {
                    return Err(Error::RecursionInconsistent {
                        layer,
                        detail: format!("row {} involves higher unknown {}", r + 1, field.label(k)),
                    });
                }
                mat.push(targets.iter().map(|&k| row[k].clone()).collect::<Vec<_>>());
                // move every already-determined term to the right-hand side
                let mut b = vec![GaussScalar::zero(); len];
                for (k, c) in row.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    if let Some(f) = &forms[k] {
                        for (acc, v) in b.iter_mut().zip(f) {
                            if !v.is_zero() {
                                *acc -= &(c * v);
                            }
                        }
                    }
                }
                rhs.push(b);
            }
            let ech = Echelon::new(mat, rhs, targets.len());
            if ech.rank() < targets.len() {
                return Err(Error::RecursionUnderdetermined { layer, free: targets.len() - ech.rank() });
            }
            for (row, &p) in ech.pivots.iter().enumerate() {
                forms[targets[p]] = Some(ech.rhs[row].clone());
            }
            for r in ech.rank()..ech.rows.len() {
                if ech.rhs[r].iter().any(|c| !c.is_zero()) {
                    constraints.push(RecursionConstraint { layer, row: rows[ech.origin[r]], form: ech.rhs[r].clone() });
                }
            }
        }
        let forms = forms.into_iter().map(|f| f.expect("all layers determined")).collect();
        Ok(TaylorRecursion { det, forms, constraints })
    }

    pub fn field(&self) -> &UnknownCoefficientField {
        &self.det.field
    }

    /// Basis of the initial data for which the recursion is consistent.
    pub fn admissible_initial_data(&self) -> Vec<Vec<GaussScalar>> {
        let len = self.forms.first().map_or(0, Vec::len);
        let rows: Vec<Vec<GaussScalar>> = self.constraints.iter().map(|c| c.form.clone()).collect();
        Echelon::new(rows.clone(), vec![vec![]; rows.len()], len).nullspace()
    }

    /// Taylor coefficients for concrete initial data.
    pub fn coefficients(&self, omega: &[GaussScalar]) -> Result<Vec<GaussScalar>> {
        let len = self.forms.first().map_or(0, Vec::len);
        if omega.len() != len {
            return Err(Error::InitialDataLength { expected: len, got: omega.len() });
        }
        let dot = |f: &[GaussScalar]| {
            let mut acc = GaussScalar::zero();
            for (a, b) in f.iter().zip(omega) {
                if !a.is_zero() && !b.is_zero() {
                    acc += &(a * b);
                }
            }
            acc
        };
        if let Some(c) = self.constraints.iter().find(|c| !dot(&c.form).is_zero()) {
            return Err(Error::RecursionInconsistent { layer: c.layer, detail: self.det.describe_row(c.row) });
        }
        Ok(self.forms.iter().map(|f| dot(f)).collect())
    }

    pub fn field_for(&self, omega: &[GaussScalar]) -> Result<VectorField> {
        Ok(self.det.field.field(&self.coefficients(omega)?))
    }
}

/// The unique degree-`≤ N` truncation of the symmetry with initial data `ω` at `point`.
pub fn taylor_from_initial_data(
    sys: &PDESystem,
    point: &[GaussScalar],
    omega: &InitialData,
    order: u32,
) -> Result<VectorField> {
    let ctx = sys.ctx();
    let v = omega.to_vec();
    let expected = InitialData::len_for(ctx.n(), ctx.m());
    if v.len() != expected || omega.alpha.iter().chain(&omega.beta).any(|r| r.len() != ctx.n() + ctx.m()) {
        return Err(Error::InitialDataLength { expected, got: v.len() });
    }
    TaylorRecursion::new(sys, point.to_vec(), order)?.field_for(&v)
}

/// A basis of the truncated symmetry algebra.
#[derive(Clone, Debug)]
pub struct SymmetryAlgebra {
    pub basis: Vec<VectorField>,
    pub order: u32,
    pub point: BasePoint,
}

impl SymmetryAlgebra {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Nullspace of the full determining system for the degree-`≤ N` ansatz.
pub fn symmetry_algebra(sys: &PDESystem, order: u32, point: &[GaussScalar]) -> Result<SymmetryAlgebra> {
    if order < 2 {
        return Err(Error::TruncationTooSmall { needed: 2, got: order });
    }
    let field = UnknownCoefficientField::new(sys.ctx(), point.to_vec(), order)?;
    let det = generate_determining(sys, &field)?;
    let basis = det.sys.echelon().nullspace().iter().map(|v| field.field(v)).collect();
    Ok(SymmetryAlgebra { basis, order, point: point.to_vec() })
}

/// True when every residual vanishes in `(x, u)`-degree `≤ max_base_degree`
/// (on the exactly known range of truncated systems), after centring at `point`.
pub fn residual_vanishes(field: &VectorField, sys: &PDESystem, point: &[GaussScalar], max_base_degree: i32) -> Result<bool> {
    let local_sys = translate_system(sys, point)?;
    let local = to_local(field, point);
    let base = sys.ctx().n() + sys.ctx().m();
    let res = lie_criterion_check(&local, &local_sys)?;
    Ok(res.values().all(|r| r.terms().all(|(m, _)| m.degree_in(|v| v < base) as i32 > max_base_degree)))
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.to_vec().iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", v.join(", "))
    }
}
