//! Implicit power-series solving: `G(ζ, y) = 0` for `ζ = ζ(y)` near a base
//! point where the Jacobian `∂G/∂ζ` is invertible.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::Echelon;
use crate::poly::{Monomial, Poly};
use crate::scalar::GaussScalar;

/// Solves `G(ζ, y) ≡ 0` to total degree `order`.
///
/// `base` gives the base point (missing variables sit at 0). The returned
/// series are expressed in local coordinates `y - y₀` and include the
/// constant `ζ₀`. Each result is checked by back-substitution.
pub fn implicit_series_solve(
    g: &[Poly],
    unknowns: &[usize],
    base: &BTreeMap<usize, GaussScalar>,
    order: u32,
) -> Result<Vec<(usize, Poly)>> {
    if g.is_empty() || g.len() != unknowns.len() {
        return Err(Error::ShapeMismatch(format!("{} equations for {} unknowns", g.len(), unknowns.len())));
    }
    let table = g[0].table().clone();
    let len = table.len();
    for &z in unknowns {
        if z >= len {
            return Err(Error::UnknownVariable(format!("variable id {z}")));
        }
    }

    let shift: Vec<(usize, Poly)> = base
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(&id, v)| (id, &Poly::var(&table, id) + &Poly::constant(&table, v.clone())))
        .collect();
    let local: Vec<Poly> = if shift.is_empty() {
        g.to_vec()
    } else {
        g.iter().map(|gk| gk.substitute(&shift)).collect::<Result<_>>()?
    };

    for (k, gk) in local.iter().enumerate() {
        if !gk.constant_term().is_zero() {
            return Err(Error::InconsistentBase(k));
        }
    }

    let k = unknowns.len();
    let jac: Vec<Vec<GaussScalar>> = local
        .iter()
        .map(|gk| unknowns.iter().map(|&z| gk.coeff(&Monomial::var(len, z))).collect())
        .collect();
    let identity: Vec<Vec<GaussScalar>> = (0..k)
        .map(|r| (0..k).map(|c| if r == c { GaussScalar::one() } else { GaussScalar::zero() }).collect())
        .collect();
    let ech = Echelon::new(jac, identity, k);
    if ech.rank() < k {
        return Err(Error::SingularJacobian);
    }
    // row r of the reduced system reads  ζ_{pivots[r]} = Σ_c rhs[r][c] · (·)_c
    let mut jinv = vec![vec![GaussScalar::zero(); k]; k];
    for (r, &p) in ech.pivots.iter().enumerate() {
        jinv[p] = ech.rhs[r].clone();
    }

    // chord iteration ζ ← ζ - J⁻¹ G(ζ); every pass fixes one more degree
    let mut zeta: Vec<Poly> = vec![Poly::zero(&table).truncated(order); k];
    for _ in 0..=order {
        let bindings: Vec<(usize, Poly)> = unknowns.iter().copied().zip(zeta.iter().cloned()).collect();
        let resid: Vec<Poly> =
            local.iter().map(|gk| gk.substitute_truncated(&bindings, order)).collect::<Result<_>>()?;
        let mut next = Vec::with_capacity(k);
        for (a, za) in zeta.iter().enumerate() {
            let mut corr = Poly::zero(&table).truncated(order);
            for (b, rb) in resid.iter().enumerate() {
                if !jinv[a][b].is_zero() {
                    corr = &corr + &rb.scale(&jinv[a][b]);
                }
            }
            next.push(za - &corr);
        }
        if next == zeta {
            break;
        }
        zeta = next;
    }

    let bindings: Vec<(usize, Poly)> = unknowns.iter().copied().zip(zeta.iter().cloned()).collect();
    for gk in &local {
        let back = gk.substitute_truncated(&bindings, order)?;
        if let Some(d) = back.order() {
            return Err(Error::ImplicitSolveFailed(d));
        }
    }

    Ok(unknowns
        .iter()
        .zip(zeta)
        .map(|(&z, s)| {
            let z0 = base.get(&z).cloned().unwrap_or_default();
            (z, &s + &Poly::constant(&table, z0))
        })
        .collect())
}
