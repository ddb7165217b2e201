//! Segre families of real hypersurfaces in normal form and the hyperquadric
//! automorphism algebras.
//!
//! The Segre relation is `u + ζ_{n+1} + Σ ε_j x_j ζ_j + R(x, u, ζ) = 0`
//! with `R` of total degree `≥ 3`. Differentiating once in `x_k` and solving
//! for `ζ`, then once more in `x_j`, eliminates the parameters and leaves
//! `u_{x_k x_j} = F_kj(x, u, u_x)`.
//!
//! Holomorphic fields on `ℂ^{n+1}` are stored as point fields in the jet
//! context `(n, 1)`: `z_j` is `x_j` and `w` is `u1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::algebra::Frame;
use crate::error::{Error, Result};
use crate::jet::{JetContext, PDESystem};
use crate::linalg::{rank, Echelon};
use crate::poly::{Monomial, Poly};
use crate::prolong::VectorField;
use crate::scalar::GaussScalar;
use crate::series::implicit_series_solve;
use crate::vars::VarTable;

pub const DEFAULT_TRUNCATION: u32 = 6;

/// Signs `ε_j` of the Levi form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature(Vec<i8>);

impl Signature {
    pub fn new(eps: Vec<i8>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidDefiningSeries(format!("bad signature {eps:?}")));
        }
        Ok(Signature(eps))
    }

    pub fn positive(n: usize) -> Self {
        Signature(vec![1; n.max(1)])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn eps(&self) -> &[i8] {
        &self.0
    }
}

/// `"++-"` style.
impl FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let eps = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidDefiningSeries(format!("bad signature character '{c}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Signature::new(eps)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &e in &self.0 {
            f.write_str(if e > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

fn zeta_names(n: usize) -> Vec<String> {
    (1..=n + 1).map(|j| format!("zeta{j}")).collect()
}

/// Jet context over `(x, u, p)` plus the parameters `zeta1..zeta{n+1}`.
pub fn segre_context(n: usize) -> Result<JetContext> {
    JetContext::from_table(VarTable::jet_with_extras(n, 1, 2, &zeta_names(n))?)
}

/// The Segre relation data: signature plus the polynomial perturbation `R`.
#[derive(Clone, Debug)]
pub struct DefiningSeries {
    signature: Signature,
    ctx: JetContext,
    r: Poly,
}

impl DefiningSeries {
    /// `r` may live on any table whose variables are among `x, u1, zeta*`.
    pub fn new(signature: Signature, r: &Poly) -> Result<Self> {
        let n = signature.n();
        let ctx = segre_context(n)?;
        let r = r.transfer(ctx.table()).map_err(|e| Error::InvalidDefiningSeries(e.to_string()))?;
        if r.truncation().is_some() {
            return Err(Error::InvalidDefiningSeries("R must be a polynomial".into()));
        }
        if r.jet_order() > 0 {
            return Err(Error::InvalidDefiningSeries("R must not involve jet variables".into()));
        }
        if let Some((m, _)) = r.terms().find(|(m, _)| m.degree() < 3) {
            let low = Poly::term(ctx.table(), m.clone(), GaussScalar::one());
            return Err(Error::InvalidDefiningSeries(format!("R has a term of degree < 3: {low}")));
        }
        Ok(DefiningSeries { signature, ctx, r })
    }

    pub fn hyperquadric(signature: Signature) -> Result<Self> {
        let r = Poly::zero(segre_context(signature.n())?.table());
        Self::new(signature, &r)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn r(&self) -> &Poly {
        &self.r
    }

    pub fn zeta(&self, j: usize) -> usize {
        self.ctx.table().named(&format!("zeta{}", j + 1)).expect("zeta variable")
    }

    /// `u + ζ_{n+1} + Σ ε_j x_j ζ_j + R`.
    pub fn relation(&self) -> Poly {
        let t = self.ctx.table();
        let n = self.signature.n();
        let mut phi = &self.ctx.u(0) + &Poly::var(t, self.zeta(n));
        for (j, &e) in self.signature.eps().iter().enumerate() {
            let term = &self.ctx.x(j) * &Poly::var(t, self.zeta(j));
            phi = &phi + &term.scale(&GaussScalar::from(e as i64));
        }
        &phi + &self.r
    }
}

/// `1 / (1 + a)` for `a` without constant term, through degree `cap`.
fn one_plus_inverse(a: &Poly, cap: u32) -> Poly {
    let t = a.table();
    let mut acc = Poly::one(t);
    let mut pw = Poly::one(t);
    let neg = -a;
    for _ in 0..cap {
        pw = pw.mul_truncated(&neg, cap);
        if pw.is_zero() {
            break;
        }
        acc = &acc + &pw;
    }
    acc
}

/// Eliminates `ζ` and returns `u_{x_k x_j} = F_kj(x, u, u_x)` through total
/// degree `truncation`. For `R = 0` the elimination is linear and the result exact.
pub fn segre_system(def: &DefiningSeries, truncation: u32) -> Result<PDESystem> {
    if truncation < 2 {
        return Err(Error::TruncationTooSmall { needed: 2, got: truncation });
    }
    let ctx = def.ctx();
    let t = ctx.table();
    let n = def.signature.n();
    let u = t.u(0);
    let phi = def.relation();
    let mut g = vec![phi.clone()];
    for k in 0..n {
        g.push(&phi.d(t.x(k)) + &(&phi.d(u) * &ctx.p(0, k)));
    }
    let zetas: Vec<usize> = (0..=n).map(|j| def.zeta(j)).collect();
    let zeta = implicit_series_solve(&g, &zetas, &BTreeMap::new(), truncation)?;

    let r = def.r();
    let denominator = r.d(u).substitute_truncated(&zeta, truncation)?;
    let inverse = one_plus_inverse(&denominator, truncation);
    let target = JetContext::new(n, 1)?;
    let mut entries = Vec::new();
    for k in 0..n {
        for j in k..n {
            let (xk, xj) = (t.x(k), t.x(j));
            let (pk, pj) = (ctx.p(0, k), ctx.p(0, j));
            let num = &(&r.d(xk).d(xj) + &(&r.d(xk).d(u) * &pj)) + &(&(&r.d(u).d(xj) * &pk) + &(&r.d(u).d(u) * &(&pj * &pk)));
            let num = num.substitute_truncated(&zeta, truncation)?;
            let mut f = -num.mul_truncated(&inverse, truncation);
            if r.is_zero() {
                f = f.into_polynomial();
            }
            let f = f.transfer(target.table())?;
            if !f.is_zero() || f.truncation().is_some() {
                entries.push((0, k, j, f));
            }
        }
    }
    PDESystem::new(&target, entries)
}

/// Checks the derived system against the solution family directly: fixes
/// `ζ = t·c`, solves the relation for `u(x, t)`, and returns
/// `u_{x_k x_j} - F_kj(x, u, u_x)` for every `k ≤ j` on its exact range.
pub fn back_substitution_residuals(def: &DefiningSeries, sys: &PDESystem, c: &[GaussScalar], truncation: u32) -> Result<Vec<Poly>> {
    let n = def.signature.n();
    if c.len() != n + 1 {
        return Err(Error::ShapeMismatch(format!("{} parameters, expected {}", c.len(), n + 1)));
    }
    let mut extras = zeta_names(n);
    extras.push("t".into());
    let table = VarTable::jet_with_extras(n, 1, 2, &extras)?;
    let ctx = JetContext::from_table(table.clone())?;
    let tt = Poly::var(&table, table.named("t").expect("t"));
    let bindings: Vec<(usize, Poly)> = (0..=n)
        .map(|j| (table.named(&format!("zeta{}", j + 1)).expect("zeta"), tt.scale(&c[j])))
        .collect();
    let phi = def.relation().transfer(&table)?.substitute(&bindings)?;
    let u = table.u(0);
    let sol = implicit_series_solve(&[phi], &[u], &BTreeMap::new(), truncation)?;
    let useries = sol[0].1.clone();
    let first: Vec<Poly> = (0..n).map(|k| useries.d(table.x(k))).collect();
    let mut jets = vec![(u, useries.clone())];
    for (k, p) in first.iter().enumerate() {
        jets.push((ctx.p_id(0, k), p.clone()));
    }
    let mut out = Vec::new();
    for k in 0..n {
        for j in k..n {
            let f = sys.f(0, k, j).transfer(&table)?;
            let lhs = first[k].d(table.x(j));
            let rhs = f.substitute_truncated(&jets, truncation)?;
            out.push(&lhs - &rhs);
        }
    }
    Ok(out)
}

/// Variables `w, wb, z1..zn, zb1..zbn`; lex order on this listing puts `w` first.
pub fn cr_table(n: usize) -> Result<Arc<VarTable>> {
    let mut names = vec!["w".to_string(), "wb".to_string()];
    names.extend((1..=n).map(|j| format!("z{j}")));
    names.extend((1..=n).map(|j| format!("zb{j}")));
    VarTable::plain(&names)
}

fn cr_w(conj: bool) -> usize {
    usize::from(conj)
}

fn cr_z(n: usize, j: usize, conj: bool) -> usize {
    2 + j + if conj { n } else { 0 }
}

/// The conjugation involution: swap holomorphic and antiholomorphic variables, conjugate coefficients.
pub fn cr_conjugate(p: &Poly, n: usize) -> Poly {
    let mut perm: Vec<usize> = vec![1, 0];
    perm.extend((0..n).map(|j| cr_z(n, j, true)));
    perm.extend((0..n).map(|j| cr_z(n, j, false)));
    p.permute_vars(&perm).conj_coeffs()
}

/// Real-valued defining polynomial `ρ(z, z̄, w, w̄)`.
#[derive(Clone, Debug)]
pub struct RealDefiningPolynomial {
    n: usize,
    rho: Poly,
}

impl RealDefiningPolynomial {
    pub fn new(n: usize, rho: &Poly) -> Result<Self> {
        let rho = rho.transfer(&cr_table(n)?)?;
        if cr_conjugate(&rho, n) != rho {
            return Err(Error::NotReal);
        }
        Ok(RealDefiningPolynomial { n, rho })
    }

    /// `w + w̄ + Σ ε_j z_j z̄_j`.
    pub fn hyperquadric(sig: &Signature) -> Self {
        let n = sig.n();
        let t = cr_table(n).expect("cr table");
        let mut rho = &Poly::var(&t, cr_w(false)) + &Poly::var(&t, cr_w(true));
        for (j, &e) in sig.eps().iter().enumerate() {
            let zz = &Poly::var(&t, cr_z(n, j, false)) * &Poly::var(&t, cr_z(n, j, true));
            rho = &rho + &zz.scale(&GaussScalar::from(e as i64));
        }
        RealDefiningPolynomial { n, rho }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> &Poly {
        &self.rho
    }
}

/// Rewrites a point-field coefficient in `(z, w)` (or `(z̄, w̄)` with conjugated coefficients).
fn to_cr(p: &Poly, n: usize, table: &Arc<VarTable>, conj: bool) -> Poly {
    let terms = p.terms().map(|(m, c)| {
        let mut e = vec![0u16; table.len()];
        for j in 0..n {
            e[cr_z(n, j, conj)] = m.exponent(j);
        }
        e[cr_w(conj)] = m.exponent(n);
        (Monomial::from_exponents(e), if conj { c.conj() } else { c.clone() })
    });
    Poly::from_terms(table, terms.collect::<Vec<_>>())
}

fn lex_leading(p: &Poly) -> Option<(Monomial, GaussScalar)> {
    p.terms().max_by(|a, b| a.0.exponents().cmp(b.0.exponents())).map(|(m, c)| (m.clone(), c.clone()))
}

/// Remainder of `f` on division by `rho` under lex order with `w > w̄ > z > z̄`.
pub fn lex_remainder(f: &Poly, rho: &Poly) -> Result<Poly> {
    let (lm, lc) = lex_leading(rho).ok_or_else(|| Error::DivisionInapplicable("zero divisor".into()))?;
    let table = f.table();
    let mut rest = f.clone();
    let mut rem = Poly::zero(table);
    while let Some((m, c)) = lex_leading(&rest) {
        match m.div(&lm) {
            Some(q) => {
                let factor = Poly::term(table, q, &c / &lc);
                rest = &rest - &(&factor * rho);
            }
            None => {
                let head = Poly::term(table, m, c);
                rest = &rest - &head;
                rem = &rem + &head;
            }
        }
    }
    Ok(rem)
}

/// `2 Re(Xρ)` reduced modulo `ρ`.
pub fn tangency_remainder(x: &VectorField, rho: &RealDefiningPolynomial) -> Result<Poly> {
    let n = rho.n;
    if x.ctx().n() != n || x.ctx().m() != 1 {
        return Err(Error::ShapeMismatch(format!("field on ({}, {}) for a hypersurface in C^{}", x.ctx().n(), x.ctx().m(), n + 1)));
    }
    let t = rho.rho.table().clone();
    let mut xr = &to_cr(&x.eta()[0], n, &t, false) * &rho.rho.d(cr_w(false));
    for j in 0..n {
        xr = &xr + &(&to_cr(&x.theta()[j], n, &t, false) * &rho.rho.d(cr_z(n, j, false)));
    }
    let re2 = &xr + &cr_conjugate(&xr, n);
    lex_remainder(&re2, &rho.rho)
}

/// True when `Re X` is tangent to `{ρ = 0}`.
pub fn cr_tangency_check(x: &VectorField, rho: &RealDefiningPolynomial) -> Result<bool> {
    Ok(tangency_remainder(x, rho)?.is_zero())
}

/// Real basis of the infinitesimal automorphisms of the hyperquadric.
#[derive(Clone, Debug)]
pub struct CrAutomorphisms {
    pub signature: Signature,
    pub basis: Vec<VectorField>,
}

impl CrAutomorphisms {
    pub fn real_dimension(&self) -> usize {
        self.basis.len()
    }
}

/// Holomorphic fields of degree `≤ 2` whose real part is tangent to the hyperquadric.
pub fn cr_automorphism_algebra(sig: &Signature) -> Result<CrAutomorphisms> {
    let n = sig.n();
    let ctx = JetContext::new(n, 1)?;
    let rho = RealDefiningPolynomial::hyperquadric(sig);
    let t = ctx.table();
    let mut monomials = Vec::new();
    for a in 0..=2u16 {
        for e in crate::vars::sorted_multi_indices(n + 1, a as usize) {
            let mut exps = vec![0u16; t.len()];
            for v in e {
                exps[v] += 1;
            }
            monomials.push(Monomial::from_exponents(exps));
        }
    }
    let mut units = Vec::new();
    for comp in 0..=n {
        for m in &monomials {
            for phase in [GaussScalar::one(), GaussScalar::i()] {
                let mut comps = vec![ctx.zero(); n + 1];
                comps[comp] = Poly::term(t, m.clone(), phase);
                let eta = comps.split_off(n);
                units.push(VectorField::new(&ctx, comps, eta)?);
            }
        }
    }
    let remainders = units.iter().map(|x| tangency_remainder(x, &rho)).collect::<Result<Vec<_>>>()?;
    let mut rows: BTreeMap<(Monomial, bool), Vec<GaussScalar>> = BTreeMap::new();
    for (k, r) in remainders.iter().enumerate() {
        for (m, c) in r.terms() {
            for (imag, part) in [(false, c.real_part()), (true, c.imag_part())] {
                if !part.is_zero() {
                    rows.entry((m.clone(), imag)).or_insert_with(|| vec![GaussScalar::zero(); units.len()])[k] = part;
                }
            }
        }
    }
    let matrix: Vec<Vec<GaussScalar>> = rows.into_values().collect();
    let nullspace = Echelon::new(matrix.clone(), vec![vec![]; matrix.len()], units.len()).nullspace();
    let basis = nullspace
        .iter()
        .map(|v| {
            units.iter().zip(v).filter(|(_, c)| !c.is_zero()).fold(VectorField::zero(&ctx), |acc, (u, c)| acc.add(&u.scale(c)))
        })
        .collect();
    Ok(CrAutomorphisms { signature: sig.clone(), basis })
}

/// `A ∩ iA = {0}` for the real span `A` of `basis`.
pub fn totally_real_check(basis: &[VectorField]) -> bool {
    if basis.is_empty() {
        return true;
    }
    let frame = Frame::of(basis);
    let cols = 2 * frame.len();
    let mut a = Vec::new();
    let mut ia = Vec::new();
    for f in basis {
        let c = frame.coordinates(f);
        let re: Vec<GaussScalar> = c.iter().map(GaussScalar::real_part).collect();
        let im: Vec<GaussScalar> = c.iter().map(GaussScalar::imag_part).collect();
        a.push(re.iter().chain(&im).cloned().collect::<Vec<_>>());
        ia.push(im.iter().map(|v| -v).chain(re.iter().cloned()).collect::<Vec<_>>());
    }
    let ra = rank(&a, cols);
    let mut both = a;
    both.extend(ia);
    rank(&both, cols) == 2 * ra
}
