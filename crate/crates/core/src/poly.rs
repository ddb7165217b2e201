//! Sparse multivariate polynomials over ℚ(i), optionally truncated at a
//! total degree so that the same type doubles as a truncated power series.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::GaussScalar;
use crate::vars::VarTable;

/// Exponent vector in the canonical variable order of a `VarTable`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of the earliest variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    degree: u32,
    exps: Box<[u16]>,
}

impl Monomial {
    pub fn one(len: usize) -> Self {
        Monomial { degree: 0, exps: vec![0; len].into_boxed_slice() }
    }

    pub fn from_exponents(exps: Vec<u16>) -> Self {
        let degree = exps.iter().map(|&e| e as u32).sum();
        Monomial { degree, exps: exps.into_boxed_slice() }
    }

    pub fn var(len: usize, id: usize) -> Self {
        let mut exps = vec![0; len];
        exps[id] = 1;
        Monomial { degree: 1, exps: exps.into_boxed_slice() }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u16] {
        &self.exps
    }

    pub fn exponent(&self, id: usize) -> u16 {
        self.exps[id]
    }

    /// Total degree restricted to the variables selected by `pred`.
    pub fn degree_in(&self, pred: impl Fn(usize) -> bool) -> u32 {
        self.exps.iter().enumerate().filter(|(k, _)| pred(*k)).map(|(_, &e)| e as u32).sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let exps: Box<[u16]> = self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect();
        Monomial { degree: self.degree + other.degree, exps }
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        for (a, b) in self.exps.iter().zip(other.exps.iter()) {
            exps.push(a.checked_sub(*b)?);
        }
        Some(Monomial { degree: self.degree - other.degree, exps: exps.into_boxed_slice() })
    }

    /// Splits into the part over variables selected by `pred` and the rest.
    pub fn split(&self, pred: impl Fn(usize) -> bool) -> (Monomial, Monomial) {
        let mut a = vec![0; self.exps.len()];
        let mut b = vec![0; self.exps.len()];
        for (k, &e) in self.exps.iter().enumerate() {
            if pred(k) {
                a[k] = e;
            } else {
                b[k] = e;
            }
        }
        (Monomial::from_exponents(a), Monomial::from_exponents(b))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exps)
    }
}

/// A polynomial, or a power series known exactly through total degree
/// `trunc` when that bound is set.
#[derive(Clone)]
pub struct Poly {
    table: Arc<VarTable>,
    terms: BTreeMap<Monomial, GaussScalar>,
    trunc: Option<i32>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_table(&self.table, &other.table) && self.terms == other.terms && self.trunc == other.trunc
    }
}

fn same_table(a: &Arc<VarTable>, b: &Arc<VarTable>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn min_bound(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Poly {
    pub fn zero(table: &Arc<VarTable>) -> Poly {
        Poly { table: table.clone(), terms: BTreeMap::new(), trunc: None }
    }

    pub fn constant(table: &Arc<VarTable>, c: GaussScalar) -> Poly {
        let mut p = Poly::zero(table);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(table.len()), c);
        }
        p
    }

    pub fn one(table: &Arc<VarTable>) -> Poly {
        Poly::constant(table, GaussScalar::one())
    }

    pub fn var(table: &Arc<VarTable>, id: usize) -> Poly {
        assert!(id < table.len(), "variable id out of range");
        Poly::term(table, Monomial::var(table.len(), id), GaussScalar::one())
    }

    pub fn term(table: &Arc<VarTable>, mono: Monomial, c: GaussScalar) -> Poly {
        assert_eq!(mono.exps.len(), table.len(), "monomial length mismatch");
        let mut p = Poly::zero(table);
        if !c.is_zero() {
            p.terms.insert(mono, c);
        }
        p
    }

    pub fn from_terms(table: &Arc<VarTable>, terms: impl IntoIterator<Item = (Monomial, GaussScalar)>) -> Poly {
        let mut p = Poly::zero(table);
        for (mono, c) in terms {
            p.add_term(mono, &c);
        }
        p
    }

    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    pub fn truncation(&self) -> Option<i32> {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &GaussScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, mono: &Monomial) -> GaussScalar {
        self.terms.get(mono).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> GaussScalar {
        self.coeff(&Monomial::one(self.table.len()))
    }

    /// Highest total degree of a stored term (`None` for zero).
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.degree)
    }

    /// Lowest total degree of a stored term (`None` for zero).
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().next().map(|m| m.degree)
    }

    /// Highest jet order among variables that occur.
    pub fn jet_order(&self) -> usize {
        let t = &self.table;
        let mut used = vec![false; t.len()];
        for m in self.terms.keys() {
            for (k, &e) in m.exps.iter().enumerate() {
                used[k] |= e > 0;
            }
        }
        used.iter().enumerate().filter(|(_, &u)| u).map(|(k, _)| t.jet_order(k)).max().unwrap_or(0)
    }

    pub fn mentions(&self, id: usize) -> bool {
        self.terms.keys().any(|m| m.exps[id] > 0)
    }

    fn check_table(&self, other: &Poly) {
        assert!(same_table(&self.table, &other.table), "polynomials live over different variable tables");
    }

    fn add_term(&mut self, mono: Monomial, c: &GaussScalar) {
        if c.is_zero() {
            return;
        }
        if let Some(t) = self.trunc {
            if mono.degree as i32 > t {
                return;
            }
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Declares the series known only through degree `bound`; drops higher terms.
    pub fn truncated(mut self, bound: u32) -> Poly {
        let bound = bound as i32;
        self.trunc = Some(self.trunc.map_or(bound, |t| t.min(bound)));
        let cut = self.trunc.unwrap();
        self.terms.retain(|m, _| m.degree as i32 <= cut);
        self
    }

    /// Drops the truncation marker. Only meaningful when the caller knows the
    /// stored terms are the whole polynomial.
    pub fn into_polynomial(mut self) -> Poly {
        self.trunc = None;
        self
    }

    /// Keeps the terms selected by `pred`; the truncation marker is kept.
    pub fn filter_terms(&self, pred: impl Fn(&Monomial) -> bool) -> Poly {
        Poly {
            table: self.table.clone(),
            terms: self.terms.iter().filter(|(m, _)| pred(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
            trunc: self.trunc,
        }
    }

    pub fn scale(&self, c: &GaussScalar) -> Poly {
        if c.is_zero() {
            return Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc: self.trunc };
        }
        Poly {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
            trunc: self.trunc,
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&GaussScalar) -> GaussScalar) -> Poly {
        let mut p = Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc: self.trunc };
        for (m, c) in &self.terms {
            p.add_term(m.clone(), &f(c));
        }
        p
    }

    /// Coefficient-wise complex conjugation.
    pub fn conj_coeffs(&self) -> Poly {
        self.map_coeffs(GaussScalar::conj)
    }

    fn mul_impl(&self, other: &Poly, cap: Option<i32>) -> Poly {
        self.check_table(other);
        // error terms: f_err * g starts at deg f_bound + 1 + ord(g), and symmetrically
        let ord = |p: &Poly| -> Option<i32> {
            match (p.order(), p.trunc) {
                (Some(o), _) => Some(o as i32),
                (None, Some(t)) => Some(t + 1),
                (None, None) => None,
            }
        };
        let a = self.trunc.and_then(|t| ord(other).map(|o| t + o));
        let b = other.trunc.and_then(|t| ord(self).map(|o| t + o));
        let trunc = min_bound(min_bound(a, b), cap);
        let mut out = Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc };
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                if let Some(t) = trunc {
                    if (ma.degree + mb.degree) as i32 > t {
                        continue;
                    }
                }
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        out
    }

    /// Product truncated at total degree `cap`.
    pub fn mul_truncated(&self, other: &Poly, cap: u32) -> Poly {
        self.mul_impl(other, Some(cap as i32))
    }

    pub fn pow(&self, exp: u32) -> Poly {
        self.pow_impl(exp, None)
    }

    fn pow_impl(&self, exp: u32, cap: Option<i32>) -> Poly {
        let mut acc = Poly::one(&self.table);
        acc.trunc = cap;
        for _ in 0..exp {
            acc = acc.mul_impl(self, cap);
        }
        acc
    }

    /// Exact partial derivative in the variable `id`. A series known through
    /// degree `d` yields one known through degree `d - 1`.
    pub fn differentiate(&self, id: usize) -> Result<Poly> {
        if id >= self.table.len() {
            return Err(Error::UnknownVariable(format!("variable id {id}")));
        }
        let mut out = Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc: self.trunc.map(|t| t - 1) };
        for (m, c) in &self.terms {
            let e = m.exps[id];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps.to_vec();
            exps[id] -= 1;
            out.add_term(Monomial::from_exponents(exps), &(c * &GaussScalar::from(e as i64)));
        }
        Ok(out)
    }

    /// Partial derivative for an id already known to be valid.
    pub fn d(&self, id: usize) -> Poly {
        self.differentiate(id).expect("variable id in range")
    }

    /// Simultaneous substitution `v ← g_v`.
    pub fn substitute(&self, bindings: &[(usize, Poly)]) -> Result<Poly> {
        self.substitute_impl(bindings, None)
    }

    /// Substitution with every intermediate product truncated at degree `cap`.
    pub fn substitute_truncated(&self, bindings: &[(usize, Poly)], cap: u32) -> Result<Poly> {
        self.substitute_impl(bindings, Some(cap as i32))
    }

    fn substitute_impl(&self, bindings: &[(usize, Poly)], cap: Option<i32>) -> Result<Poly> {
        let len = self.table.len();
        let mut bound: HashMap<usize, &Poly> = HashMap::new();
        for (id, g) in bindings {
            if *id >= len {
                return Err(Error::UnknownVariable(format!("variable id {id}")));
            }
            self.check_table(g);
            bound.insert(*id, g);
        }
        if self.trunc.is_some() {
            for (id, g) in &bound {
                if self.mentions(*id) && !g.constant_term().is_zero() {
                    return Err(Error::SeriesComposition);
                }
            }
        }
        let mut powers: HashMap<(usize, u16), Poly> = HashMap::new();
        let mut out = Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc: min_bound(self.trunc, cap) };
        for (m, c) in &self.terms {
            let mut kept = m.exps.to_vec();
            let mut factor: Option<Poly> = None;
            for (id, g) in &bound {
                let e = m.exps[*id];
                if e == 0 {
                    continue;
                }
                kept[*id] = 0;
                let pw = powers.entry((*id, e)).or_insert_with(|| g.pow_impl(e as u32, cap)).clone();
                factor = Some(match factor {
                    None => pw,
                    Some(f) => f.mul_impl(&pw, cap),
                });
            }
            let head = Poly::term(&self.table, Monomial::from_exponents(kept), c.clone());
            let piece = match factor {
                None => head,
                Some(f) => head.mul_impl(&f, cap),
            };
            out = &out + &piece;
        }
        out.trunc = min_bound(out.trunc, min_bound(self.trunc, cap));
        if let Some(t) = out.trunc {
            out.terms.retain(|m, _| m.degree as i32 <= t);
        }
        Ok(out)
    }

    /// Re-expresses this polynomial over another table containing every
    /// variable that occurs (matched by identity).
    pub fn transfer(&self, target: &Arc<VarTable>) -> Result<Poly> {
        let map: Vec<Option<usize>> = self.table.vars().iter().map(|v| target.id_of(v)).collect();
        let mut out = Poly { table: target.clone(), terms: BTreeMap::new(), trunc: self.trunc };
        for (m, c) in &self.terms {
            let mut exps = vec![0u16; target.len()];
            for (k, &e) in m.exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = map[k].ok_or_else(|| Error::UnknownVariable(self.table.name(k)))?;
                exps[j] = e;
            }
            out.add_term(Monomial::from_exponents(exps), c);
        }
        Ok(out)
    }

    /// Renames variables by a permutation of ids (`perm[old] = new`).
    pub fn permute_vars(&self, perm: &[usize]) -> Poly {
        assert_eq!(perm.len(), self.table.len());
        let mut out = Poly { table: self.table.clone(), terms: BTreeMap::new(), trunc: self.trunc };
        for (m, c) in &self.terms {
            let mut exps = vec![0u16; perm.len()];
            for (k, &e) in m.exps.iter().enumerate() {
                exps[perm[k]] += e;
            }
            out.add_term(Monomial::from_exponents(exps), c);
        }
        out
    }

    /// Equality of the parts both sides know exactly.
    pub fn agrees_with(&self, other: &Poly) -> bool {
        self.check_table(other);
        let bound = min_bound(self.trunc, other.trunc);
        (self - other).terms.keys().all(|m| bound.is_some_and(|t| m.degree as i32 > t))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.check_table(rhs);
        let (big, small) = if self.terms.len() >= rhs.terms.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        out.trunc = min_bound(self.trunc, rhs.trunc);
        if let Some(t) = out.trunc {
            out.terms.retain(|m, _| m.degree as i32 <= t);
        }
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_impl(rhs, None)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            table: self.table.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            trunc: self.trunc,
        }
    }
}

macro_rules! forward_owned_poly {
    ($tr:ident, $m:ident) => {
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned_poly!(Add, add);
forward_owned_poly!(Sub, sub);
forward_owned_poly!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

fn fmt_monomial(table: &VarTable, m: &Monomial) -> String {
    let mut parts = Vec::new();
    for (k, &e) in m.exps.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(table.name(k)),
            _ => parts.push(format!("{}^{}", table.name(k), e)),
        }
    }
    parts.join("*")
}

/// Human-readable, parser-compatible rendering, highest degree first.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (n, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono = fmt_monomial(&self.table, m);
            let both = !c.re().is_zero() && !c.im().is_zero();
            let (negative, mag) = if both {
                (false, c.clone())
            } else if c.re() < &num_rational::BigRational::from_integer(0.into())
                || c.im() < &num_rational::BigRational::from_integer(0.into())
            {
                (true, -c)
            } else {
                (false, c.clone())
            };
            let coef = if both { format!("({})", mag) } else { mag.to_string() };
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => coef,
                (false, true) => mono,
                (false, false) => format!("{}*{}", coef, mono),
            };
            match (n, negative) {
                (0, false) => write!(f, "{}", body)?,
                (0, true) => write!(f, "-{}", body)?,
                (_, false) => write!(f, " + {}", body)?,
                (_, true) => write!(f, " - {}", body)?,
            }
        }
        if let Some(t) = self.trunc {
            write!(f, " + O({})", t + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Arc<VarTable> {
        VarTable::jet_space(2, 2, 2).unwrap()
    }

    #[test]
    fn differentiate_examples() {
        let t = table();
        let x1 = Poly::var(&t, t.x(0));
        let u1 = Poly::var(&t, t.u(0));
        let f = &x1.pow(2) * &u1;
        let two = GaussScalar::from(2);
        assert_eq!(f.d(t.x(0)), (&x1 * &u1).scale(&two));
        assert_eq!(f.d(t.u(0)), x1.pow(2));
        let p12 = Poly::var(&t, t.jet(0, &[1]).unwrap());
        let g = &p12.pow(2) + &x1;
        assert_eq!(g.d(t.jet(0, &[1]).unwrap()), p12.scale(&two));
        assert!(f.differentiate(999).is_err());
    }

    #[test]
    fn substitute_examples() {
        let t = table();
        let x1 = Poly::var(&t, t.x(0));
        let u1 = Poly::var(&t, t.u(0));
        let one = Poly::one(&t);
        assert_eq!((&x1 + &u1).substitute(&[(t.x(0), Poly::zero(&t))]).unwrap(), u1);
        let p11 = t.jet(0, &[0]).unwrap();
        let sq = Poly::var(&t, p11).pow(2);
        assert_eq!(sq.substitute(&[(p11, u1.clone())]).unwrap(), u1.pow(2));
        let shifted = x1.pow(2).substitute(&[(t.x(0), &x1 + &one)]).unwrap();
        let expect = &(&x1.pow(2) + &x1.scale(&GaussScalar::from(2))) + &one;
        assert_eq!(shifted, expect);
    }

    #[test]
    fn truncated_series_refuses_constant_shift() {
        let t = table();
        let x1 = Poly::var(&t, t.x(0));
        let series = (&Poly::one(&t) + &x1).truncated(3);
        let err = series.substitute(&[(t.x(0), &x1 + &Poly::one(&t))]).unwrap_err();
        assert_eq!(err, Error::SeriesComposition);
        // a substitution without constant term is fine
        let ok = series.substitute(&[(t.x(0), x1.pow(2))]).unwrap();
        assert_eq!(ok, (&Poly::one(&t) + &x1.pow(2)).truncated(3));
    }

    #[test]
    fn truncation_bookkeeping() {
        let t = table();
        let x1 = Poly::var(&t, t.x(0));
        let s = (&Poly::one(&t) + &x1).truncated(2);
        // multiplying by x raises the exact range
        assert_eq!((&s * &x1).truncation(), Some(3));
        assert_eq!(s.d(t.x(0)).truncation(), Some(1));
        assert_eq!((&s * &s).truncation(), Some(2));
        assert_eq!((&s * &s).to_string(), "x1^2 + 2*x1 + 1 + O(3)");
    }

    #[test]
    fn display_signs() {
        let t = table();
        let x1 = Poly::var(&t, t.x(0));
        let u2 = Poly::var(&t, t.u(1));
        let f = &x1.scale(&GaussScalar::from_ratio(-3, 2)) + &(&u2 * &x1).scale(&GaussScalar::complex(1, -1));
        assert_eq!(f.to_string(), "(1-i)*x1*u2 - 3/2*x1");
        assert_eq!(Poly::zero(&t).to_string(), "0");
        assert_eq!(x1.scale(&-GaussScalar::i()).to_string(), "-i*x1");
    }
}
