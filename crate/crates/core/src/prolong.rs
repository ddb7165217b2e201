//! Point vector fields `X = Σ θ_j ∂/∂x_j + Σ η^μ ∂/∂u^μ`, their prolongations
//! to jet space and the tangency (Lie) criterion for a second-order system.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::jet::{total_derivative, JetContext, PDESystem};
use crate::poly::Poly;
use crate::scalar::GaussScalar;
use crate::vars::sorted_multi_indices;

/// A point vector field; every coefficient depends on `(x, u)` only.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    ctx: JetContext,
    theta: Vec<Poly>,
    eta: Vec<Poly>,
}

impl VectorField {
    pub fn new(ctx: &JetContext, theta: Vec<Poly>, eta: Vec<Poly>) -> Result<Self> {
        if theta.len() != ctx.n() || eta.len() != ctx.m() {
            return Err(Error::ShapeMismatch(format!(
                "field has {} x-components and {} u-components, context has n = {}, m = {}",
                theta.len(),
                eta.len(),
                ctx.n(),
                ctx.m()
            )));
        }
        let base = ctx.n() + ctx.m();
        for c in theta.iter().chain(eta.iter()) {
            if c.table() != ctx.table() {
                return Err(Error::ShapeMismatch("coefficient over a different variable table".into()));
            }
            if let Some(id) = (base..ctx.table().len()).find(|&id| c.mentions(id)) {
                return Err(Error::UnknownVariable(format!(
                    "{} may not appear in a point vector field",
                    ctx.table().name(id)
                )));
            }
        }
        Ok(VectorField { ctx: ctx.clone(), theta, eta })
    }

    pub fn zero(ctx: &JetContext) -> Self {
        VectorField { ctx: ctx.clone(), theta: vec![ctx.zero(); ctx.n()], eta: vec![ctx.zero(); ctx.m()] }
    }

    /// `∂/∂x_k`.
    pub fn translation_x(ctx: &JetContext, k: usize) -> Self {
        let mut f = Self::zero(ctx);
        f.theta[k] = Poly::one(ctx.table());
        f
    }

    /// `∂/∂u^mu`.
    pub fn translation_u(ctx: &JetContext, mu: usize) -> Self {
        let mut f = Self::zero(ctx);
        f.eta[mu] = Poly::one(ctx.table());
        f
    }

    pub fn ctx(&self) -> &JetContext {
        &self.ctx
    }

    pub fn theta(&self) -> &[Poly] {
        &self.theta
    }

    pub fn eta(&self) -> &[Poly] {
        &self.eta
    }

    /// All coefficients in the order `θ_1..θ_n, η^1..η^m`.
    pub fn components(&self) -> impl Iterator<Item = &Poly> {
        self.theta.iter().chain(self.eta.iter())
    }

    pub fn is_zero(&self) -> bool {
        self.components().all(Poly::is_zero)
    }

    /// The field as a derivation on functions of `(x, u)`.
    pub fn apply(&self, f: &Poly) -> Poly {
        let t = self.ctx.table();
        let mut out = Poly::zero(t);
        for (j, th) in self.theta.iter().enumerate() {
            let id = t.x(j);
            if !th.is_zero() && f.mentions(id) {
                out = &out + &(th * &f.d(id));
            }
        }
        for (mu, et) in self.eta.iter().enumerate() {
            let id = t.u(mu);
            if !et.is_zero() && f.mentions(id) {
                out = &out + &(et * &f.d(id));
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> VectorField {
        VectorField {
            ctx: self.ctx.clone(),
            theta: self.theta.iter().map(&f).collect(),
            eta: self.eta.iter().map(&f).collect(),
        }
    }

    pub fn zip_with(&self, other: &VectorField, f: impl Fn(&Poly, &Poly) -> Poly) -> VectorField {
        VectorField {
            ctx: self.ctx.clone(),
            theta: self.theta.iter().zip(&other.theta).map(|(a, b)| f(a, b)).collect(),
            eta: self.eta.iter().zip(&other.eta).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: &GaussScalar) -> VectorField {
        self.map(|p| p.scale(c))
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.ctx.table();
        let mut parts = Vec::new();
        for (k, c) in self.theta.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({}) d/d{}", c, t.name(t.x(k))));
            }
        }
        for (k, c) in self.eta.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("({}) d/d{}", c, t.name(t.u(k))));
            }
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" + "))
        }
    }
}

/// The `r`-th prolongation of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct ProlongedField {
    base: VectorField,
    order: usize,
    /// `η^μ_I` keyed by `(μ, sorted I)`.
    eta_jet: BTreeMap<(usize, Vec<usize>), Poly>,
}

impl ProlongedField {
    pub fn base(&self) -> &VectorField {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `η^μ_I`; the index is sorted before lookup.
    pub fn eta_jet(&self, mu: usize, index: &[usize]) -> Option<&Poly> {
        let mut index = index.to_vec();
        index.sort_unstable();
        self.eta_jet.get(&(mu, index))
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&(usize, Vec<usize>), &Poly)> {
        self.eta_jet.iter()
    }
}

/// Prolongs `x` to order `r` by the recursion
/// `η^μ_{I,i} = D_i η^μ_I - Σ_j (D_i θ_j) u^μ_{I,j}`, starting from `η^μ_∅ = η^μ`.
pub fn prolong(x: &VectorField, r: usize) -> Result<ProlongedField> {
    let ctx = x.ctx();
    if r > ctx.max_jet_order() {
        return Err(Error::JetOrderOverflow { needed: r, max: ctx.max_jet_order() });
    }
    let (n, m) = (ctx.n(), ctx.m());
    let d_theta: Vec<Vec<Poly>> = (0..n)
        .map(|i| x.theta.iter().map(|th| total_derivative(ctx, th, i)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut eta_jet: BTreeMap<(usize, Vec<usize>), Poly> = BTreeMap::new();
    for s in 1..=r {
        for index in sorted_multi_indices(n, s) {
            let (last, head) = index.split_last().expect("nonempty multi-index");
            for mu in 0..m {
                let prev = if head.is_empty() { x.eta[mu].clone() } else { eta_jet[&(mu, head.to_vec())].clone() };
                eta_jet.insert((mu, index.clone()), extend_coefficient(ctx, &d_theta, &prev, mu, head, *last)?);
            }
        }
    }
    Ok(ProlongedField { base: x.clone(), order: r, eta_jet })
}

/// One step of the prolongation recursion: `D_i η^μ_I - Σ_j (D_i θ_j) u^μ_{I,j}`.
fn extend_coefficient(
    ctx: &JetContext,
    d_theta: &[Vec<Poly>],
    prev: &Poly,
    mu: usize,
    head: &[usize],
    i: usize,
) -> Result<Poly> {
    let mut out = total_derivative(ctx, prev, i)?;
    for (j, dth) in d_theta[i].iter().enumerate() {
        if dth.is_zero() {
            continue;
        }
        let mut idx = head.to_vec();
        idx.push(j);
        out = &out - &(dth * &ctx.jet_var(mu, &idx)?);
    }
    Ok(out)
}

/// Computes `η^μ_K` for a sorted `K` by peeling off the element at `split`
/// instead of the last one. Used to check that the recursion is symmetric.
pub fn prolong_coefficient_via(x: &VectorField, mu: usize, index: &[usize], split: usize) -> Result<Poly> {
    let ctx = x.ctx();
    let d_theta: Vec<Vec<Poly>> = (0..ctx.n())
        .map(|i| x.theta.iter().map(|th| total_derivative(ctx, th, i)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = index.to_vec();
    let peeled = order.remove(split);
    order.push(peeled);
    let mut coeff = x.eta[mu].clone();
    for s in 0..order.len() {
        coeff = extend_coefficient(ctx, &d_theta, &coeff, mu, &order[..s], order[s])?;
    }
    Ok(coeff)
}

/// Evaluates `X^{(r)} f = Σ θ_j ∂f/∂x_j + Σ η^μ ∂f/∂u^μ + Σ η^μ_I ∂f/∂u^μ_I`.
pub fn apply_prolonged(xp: &ProlongedField, f: &Poly) -> Result<Poly> {
    let order = f.jet_order();
    if order > xp.order {
        return Err(Error::JetOrderOverflow { needed: order, max: xp.order });
    }
    let t = xp.base.ctx.table();
    let mut out = xp.base.apply(f);
    for ((mu, index), coeff) in &xp.eta_jet {
        let id = t.jet(*mu, index).expect("prolonged index exists");
        if !coeff.is_zero() && f.mentions(id) {
            out = &out + &(coeff * &f.d(id));
        }
    }
    Ok(out)
}

/// Residuals `η^μ_{ij} - X^{(1)} F^μ_{ij}` restricted to the equation manifold,
/// keyed by `(μ, i, j)` with `i ≤ j`. `X` is a symmetry iff all vanish.
pub fn lie_criterion_check(x: &VectorField, sys: &PDESystem) -> Result<BTreeMap<(usize, usize, usize), Poly>> {
    let ctx = sys.ctx();
    if x.ctx.table() != ctx.table() {
        return Err(Error::ShapeMismatch("field and system use different contexts".into()));
    }
    let xp = prolong(x, 2)?;
    let mut out = BTreeMap::new();
    for mu in 0..ctx.m() {
        for i in 0..ctx.n() {
            for j in i..ctx.n() {
                let lhs = xp.eta_jet(mu, &[i, j]).expect("second prolongation");
                let rhs = apply_prolonged(&xp, &sys.f(mu, i, j))?;
                out.insert((mu, i, j), sys.restrict(&(lhs - &rhs))?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx11() -> JetContext {
        JetContext::new(1, 1).unwrap()
    }

    fn s(v: i64) -> GaussScalar {
        GaussScalar::from(v)
    }

    #[test]
    fn translation_has_trivial_prolongation() {
        let ctx = JetContext::new(2, 2).unwrap();
        let xp = prolong(&VectorField::translation_x(&ctx, 0), 3).unwrap();
        assert!(xp.coefficients().all(|(_, c)| c.is_zero()));
    }

    #[test]
    fn u_d_dx_prolongation() {
        let ctx = ctx11();
        let x = VectorField::new(&ctx, vec![ctx.u(0)], vec![ctx.zero()]).unwrap();
        let xp = prolong(&x, 2).unwrap();
        let p = ctx.p(0, 0);
        let p11 = ctx.jet_var(0, &[0, 0]).unwrap();
        assert_eq!(xp.eta_jet(0, &[0]).unwrap(), &-p.pow(2));
        assert_eq!(xp.eta_jet(0, &[0, 0]).unwrap(), &(&p * &p11).scale(&s(-3)));
    }

    #[test]
    fn projective_field_prolongation() {
        let ctx = ctx11();
        let (x, u) = (ctx.x(0), ctx.u(0));
        let field = VectorField::new(&ctx, vec![x.pow(2)], vec![&x * &u]).unwrap();
        let xp = prolong(&field, 2).unwrap();
        let p = ctx.p(0, 0);
        let p11 = ctx.jet_var(0, &[0, 0]).unwrap();
        assert_eq!(xp.eta_jet(0, &[0]).unwrap(), &(&u - &(&x * &p)));
        assert_eq!(xp.eta_jet(0, &[0, 0]).unwrap(), &(&x * &p11).scale(&s(-3)));
        // the prolonged action on p reproduces η_1
        assert_eq!(apply_prolonged(&xp, &p).unwrap(), &u - &(&x * &p));
    }

    #[test]
    fn apply_prolonged_examples() {
        let ctx = JetContext::new(2, 1).unwrap();
        let xp = prolong(&VectorField::translation_x(&ctx, 0), 1).unwrap();
        assert_eq!(apply_prolonged(&xp, &ctx.x(0)).unwrap(), Poly::one(ctx.table()));
        assert!(apply_prolonged(&xp, &ctx.u(0)).unwrap().is_zero());
        let second = ctx.jet_var(0, &[0, 1]).unwrap();
        assert!(matches!(apply_prolonged(&xp, &second), Err(Error::JetOrderOverflow { .. })));
    }

    #[test]
    fn lie_criterion_examples() {
        let ctx = ctx11();
        let flat = PDESystem::flat(&ctx);
        let (x, u) = (ctx.x(0), ctx.u(0));
        let proj = VectorField::new(&ctx, vec![x.pow(2)], vec![&x * &u]).unwrap();
        assert!(lie_criterion_check(&proj, &flat).unwrap().values().all(Poly::is_zero));

        let bad = VectorField::new(&ctx, vec![ctx.zero()], vec![x.pow(2)]).unwrap();
        let res = lie_criterion_check(&bad, &flat).unwrap();
        assert_eq!(res[&(0, 0, 0)], Poly::constant(ctx.table(), s(2)));

        let sys = PDESystem::new(&ctx, [(0, 0, 0, ctx.p(0, 0))]).unwrap();
        let tr = VectorField::translation_x(&ctx, 0);
        assert!(lie_criterion_check(&tr, &sys).unwrap().values().all(Poly::is_zero));
    }

    #[test]
    fn point_fields_reject_jets() {
        let ctx = ctx11();
        assert!(VectorField::new(&ctx, vec![ctx.p(0, 0)], vec![ctx.zero()]).is_err());
        assert!(VectorField::new(&ctx, vec![], vec![ctx.zero()]).is_err());
    }

    #[test]
    fn prolongation_order_capped() {
        let ctx = JetContext::with_order(1, 1, 2).unwrap();
        assert!(prolong(&VectorField::zero(&ctx), 3).is_err());
    }
}
