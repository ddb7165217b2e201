//! Jet-space contexts, systems `u^k_{ij} = F^k_{ij}(x, u, u^{(1)})`, total
//! derivatives and the integrability (involutivity) check.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::vars::{Var, VarTable};

pub const DEFAULT_JET_ORDER: usize = 3;

/// A jet table with room for at least second-order jets.
#[derive(Clone, Debug, PartialEq)]
pub struct JetContext {
    table: Arc<VarTable>,
}

impl JetContext {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_order(n, m, DEFAULT_JET_ORDER)
    }

    pub fn with_order(n: usize, m: usize, max_jet_order: usize) -> Result<Self> {
        Self::from_table(VarTable::jet_space(n, m, max_jet_order.max(2))?)
    }

    /// Wraps an existing jet table (named extras allowed).
    pub fn from_table(table: Arc<VarTable>) -> Result<Self> {
        if table.n() == 0 || table.m() == 0 {
            return Err(Error::InvalidDimensions { n: table.n(), m: table.m() });
        }
        if table.max_jet_order() < 2 {
            return Err(Error::JetOrderOverflow { needed: 2, max: table.max_jet_order() });
        }
        Ok(JetContext { table })
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn m(&self) -> usize {
        self.table.m()
    }

    pub fn max_jet_order(&self) -> usize {
        self.table.max_jet_order()
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(&self.table)
    }

    pub fn x(&self, i: usize) -> Poly {
        Poly::var(&self.table, self.table.x(i))
    }

    pub fn u(&self, mu: usize) -> Poly {
        Poly::var(&self.table, self.table.u(mu))
    }

    /// First-jet variable `u^mu_i`.
    pub fn p(&self, mu: usize, i: usize) -> Poly {
        Poly::var(&self.table, self.p_id(mu, i))
    }

    pub fn p_id(&self, mu: usize, i: usize) -> usize {
        self.table.jet(mu, &[i]).expect("first jets exist")
    }

    /// Jet variable `u^mu_I` for any admissible multi-index.
    pub fn jet_var(&self, mu: usize, index: &[usize]) -> Result<Poly> {
        let id = self.table.jet(mu, index).ok_or(Error::JetOrderOverflow {
            needed: index.len(),
            max: self.max_jet_order(),
        })?;
        Ok(Poly::var(&self.table, id))
    }
}

/// Total derivative `D_i f`. Named extra variables are treated as constants.
pub fn total_derivative(ctx: &JetContext, f: &Poly, i: usize) -> Result<Poly> {
    let t = ctx.table();
    let mut out = Poly::zero(t);
    for id in 0..t.len() {
        if !f.mentions(id) {
            continue;
        }
        let lifted = match t.var(id) {
            Var::X(j) if *j == i => None,
            Var::X(_) | Var::Named(_) => continue,
            Var::U(mu) => Some(ctx.p_id(*mu, i)),
            Var::Jet { mu, index } => {
                let mut next = index.clone();
                next.push(i);
                let id = t.jet(*mu, &next).ok_or(Error::JetOrderOverflow {
                    needed: next.len(),
                    max: t.max_jet_order(),
                })?;
                Some(id)
            }
        };
        let df = f.d(id);
        out = match lifted {
            None => &out + &df,
            Some(v) => &out + &(&df * &Poly::var(t, v)),
        };
    }
    Ok(out)
}

/// A completely overdetermined second-order system. Entries are stored for
/// `i ≤ j` only, so `F^k_{ij} = F^k_{ji}` holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct PDESystem {
    ctx: JetContext,
    f: BTreeMap<(usize, usize, usize), Poly>,
}

impl PDESystem {
    /// The system `u^k_{ij} = 0`.
    pub fn flat(ctx: &JetContext) -> Self {
        PDESystem { ctx: ctx.clone(), f: BTreeMap::new() }
    }

    /// Builds from `(k, i, j, F)` entries (zero-based, any order of `i, j`).
    /// Entries must live over the context table and mention first jets at most.
    pub fn new(ctx: &JetContext, entries: impl IntoIterator<Item = (usize, usize, usize, Poly)>) -> Result<Self> {
        let mut f = BTreeMap::new();
        for (k, i, j, poly) in entries {
            if k >= ctx.m() || i >= ctx.n() || j >= ctx.n() {
                return Err(Error::InvalidSystem(format!("entry index ({}, {}, {}) out of range", k + 1, i + 1, j + 1)));
            }
            if !Arc::ptr_eq(poly.table(), ctx.table()) && **poly.table() != **ctx.table() {
                return Err(Error::InvalidSystem("entry uses a different variable table".into()));
            }
            let order = poly.jet_order();
            if order > 1 {
                return Err(Error::JetVariablesNotAllowed { found: order, allowed: 1 });
            }
            let key = (k, i.min(j), i.max(j));
            if f.contains_key(&key) {
                return Err(Error::InvalidSystem(format!("duplicate entry ({}, {}, {})", k + 1, key.1 + 1, key.2 + 1)));
            }
            if !poly.is_zero() || poly.truncation().is_some() {
                f.insert(key, poly);
            }
        }
        Ok(PDESystem { ctx: ctx.clone(), f })
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn f(&self, k: usize, i: usize, j: usize) -> Poly {
        self.f.get(&(k, i.min(j), i.max(j))).cloned().unwrap_or_else(|| self.ctx.zero())
    }

    /// Stored nonzero entries keyed by `(k, i, j)` with `i ≤ j`.
    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize, usize), &Poly)> {
        self.f.iter()
    }

    pub fn is_flat(&self) -> bool {
        self.f.values().all(|p| p.is_zero())
    }

    /// Smallest truncation bound among the entries, if any is a truncated series.
    pub fn truncation(&self) -> Option<i32> {
        self.f.values().filter_map(|p| p.truncation()).min()
    }

    /// Replaces every second-jet variable `u^mu_{jl}` by `F^mu_{jl}`.
    pub fn restrict(&self, g: &Poly) -> Result<Poly> {
        let ctx = &self.ctx;
        let mut bindings = Vec::new();
        for mu in 0..ctx.m() {
            for j in 0..ctx.n() {
                for l in j..ctx.n() {
                    let id = ctx.table().jet(mu, &[j, l]).expect("second jets exist");
                    if g.mentions(id) {
                        bindings.push((id, self.f(mu, j, l)));
                    }
                }
            }
        }
        if g.jet_order() > 2 {
            return Err(Error::JetVariablesNotAllowed { found: g.jet_order(), allowed: 2 });
        }
        if bindings.is_empty() {
            return Ok(g.clone());
        }
        g.substitute(&bindings)
    }
}

/// `Δ_i f = ∂f/∂x_i + Σ_k u^k_i ∂f/∂u^k + Σ_{μ,j} F^μ_{ij} ∂f/∂u^μ_j` for `f`
/// depending on first jets at most.
pub fn restricted_total_derivative(sys: &PDESystem, f: &Poly, i: usize) -> Result<Poly> {
    let order = f.jet_order();
    if order > 1 {
        return Err(Error::JetVariablesNotAllowed { found: order, allowed: 1 });
    }
    let ctx = sys.ctx();
    let mut out = f.d(ctx.table().x(i));
    for k in 0..ctx.m() {
        let id = ctx.table().u(k);
        if f.mentions(id) {
            out = &out + &(&f.d(id) * &ctx.p(k, i));
        }
    }
    for mu in 0..ctx.m() {
        for j in 0..ctx.n() {
            let id = ctx.p_id(mu, j);
            if f.mentions(id) {
                out = &out + &(&f.d(id) * &sys.f(mu, i, j));
            }
        }
    }
    Ok(out)
}

/// A failed compatibility condition `Δ_l F^k_{ij} = Δ_i F^k_{lj}` (zero-based).
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityFailure {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub l: usize,
    /// `Δ_l F^k_{ij} - Δ_i F^k_{lj}`.
    pub difference: Poly,
}

impl fmt::Display for CompatibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {}): {}", self.k + 1, self.i + 1, self.j + 1, self.l + 1, self.difference)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Involutivity {
    Involutive,
    Fails(Vec<CompatibilityFailure>),
}

impl Involutivity {
    pub fn is_involutive(&self) -> bool {
        matches!(self, Involutivity::Involutive)
    }
}

/// Cross-derivative compatibility of the lifted system, for every `k`, `j`
/// and every pair `i < l`. Truncated entries are compared on their common
/// exact range.
pub fn involutivity_check(sys: &PDESystem) -> Result<Involutivity> {
    let ctx = sys.ctx();
    let mut failures = Vec::new();
    for k in 0..ctx.m() {
        for i in 0..ctx.n() {
            for l in i + 1..ctx.n() {
                for j in 0..ctx.n() {
                    let a = restricted_total_derivative(sys, &sys.f(k, i, j), l)?;
                    let b = restricted_total_derivative(sys, &sys.f(k, l, j), i)?;
                    let difference = &a - &b;
                    if !difference.is_zero() {
                        failures.push(CompatibilityFailure { k, i, j, l, difference });
                    }
                }
            }
        }
    }
    Ok(if failures.is_empty() { Involutivity::Involutive } else { Involutivity::Fails(failures) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussScalar;

    #[test]
    fn total_derivative_examples() {
        let ctx = JetContext::new(2, 1).unwrap();
        assert_eq!(total_derivative(&ctx, &ctx.x(0), 0).unwrap(), Poly::one(ctx.table()));
        assert_eq!(total_derivative(&ctx, &ctx.u(0), 1).unwrap(), ctx.p(0, 1));
        let f = &ctx.p(0, 0) * &ctx.x(1);
        let expect = &ctx.p(0, 0) + &(&ctx.x(1) * &ctx.jet_var(0, &[0, 1]).unwrap());
        assert_eq!(total_derivative(&ctx, &f, 1).unwrap(), expect);
    }

    #[test]
    fn total_derivative_overflow() {
        let ctx = JetContext::with_order(1, 1, 2).unwrap();
        let f = ctx.jet_var(0, &[0, 0]).unwrap();
        assert_eq!(total_derivative(&ctx, &f, 0).unwrap_err(), Error::JetOrderOverflow { needed: 3, max: 2 });
    }

    #[test]
    fn restricted_derivative_examples() {
        let ctx = JetContext::new(1, 1).unwrap();
        let flat = PDESystem::flat(&ctx);
        assert!(restricted_total_derivative(&flat, &ctx.p(0, 0), 0).unwrap().is_zero());
        let sys = PDESystem::new(&ctx, [(0, 0, 0, ctx.u(0))]).unwrap();
        assert_eq!(restricted_total_derivative(&sys, &ctx.p(0, 0), 0).unwrap(), ctx.u(0));
        let f = &ctx.x(0) * &ctx.u(0);
        let expect = &ctx.u(0) + &(&ctx.x(0) * &ctx.p(0, 0));
        assert_eq!(restricted_total_derivative(&sys, &f, 0).unwrap(), expect);
        let second = ctx.jet_var(0, &[0, 0]).unwrap();
        assert!(restricted_total_derivative(&sys, &second, 0).is_err());
    }

    #[test]
    fn system_rejects_second_jets() {
        let ctx = JetContext::new(1, 1).unwrap();
        let bad = ctx.jet_var(0, &[0, 0]).unwrap();
        assert!(matches!(PDESystem::new(&ctx, [(0, 0, 0, bad)]), Err(Error::JetVariablesNotAllowed { .. })));
        assert!(PDESystem::new(&ctx, [(0, 0, 1, ctx.u(0))]).is_err());
    }

    #[test]
    fn involutivity_examples() {
        for (n, m) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
            let ctx = JetContext::new(n, m).unwrap();
            assert!(involutivity_check(&PDESystem::flat(&ctx)).unwrap().is_involutive());
        }
        let ctx = JetContext::new(2, 1).unwrap();
        let sys = PDESystem::new(&ctx, [(0, 0, 0, ctx.x(1))]).unwrap();
        let Involutivity::Fails(fails) = involutivity_check(&sys).unwrap() else {
            panic!("expected failure");
        };
        assert_eq!((fails[0].k, fails[0].i, fails[0].j, fails[0].l), (0, 0, 0, 1));
        assert_eq!(fails[0].difference, Poly::one(ctx.table()));
        // n = 1 has no cross conditions
        let ctx = JetContext::new(1, 1).unwrap();
        let any = &ctx.x(0).pow(3) + &ctx.p(0, 0).scale(&GaussScalar::i());
        assert!(involutivity_check(&PDESystem::new(&ctx, [(0, 0, 0, any)]).unwrap()).unwrap().is_involutive());
    }

    #[test]
    fn restrict_substitutes_second_jets() {
        let ctx = JetContext::new(1, 1).unwrap();
        let sys = PDESystem::new(&ctx, [(0, 0, 0, ctx.p(0, 0))]).unwrap();
        let g = &ctx.jet_var(0, &[0, 0]).unwrap() * &ctx.x(0);
        assert_eq!(sys.restrict(&g).unwrap(), &ctx.p(0, 0) * &ctx.x(0));
    }
}
