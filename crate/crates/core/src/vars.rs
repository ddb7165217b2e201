//! Variable tables: the canonical ordering of independent, dependent and
//! jet coordinates, plus any auxiliary named parameters.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A coordinate. Indices are zero-based; display is one-based (`x1`, `u1`, `p1_2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    U(usize),
    /// `u^mu_I` with `I` sorted ascending and nonempty.
    Jet { mu: usize, index: Vec<usize> },
    Named(String),
}

impl Var {
    pub fn jet_order(&self) -> usize {
        match self {
            Var::Jet { index, .. } => index.len(),
            _ => 0,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::U(mu) => write!(f, "u{}", mu + 1),
            Var::Jet { mu, index } => {
                write!(f, "p{}", mu + 1)?;
                for i in index {
                    write!(f, "_{}", i + 1)?;
                }
                Ok(())
            }
            Var::Named(s) => f.write_str(s),
        }
    }
}

/// All sorted multi-indices of length `len` over `0..n`, in lexicographic order.
pub fn sorted_multi_indices(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, len, i, cur, out);
            cur.pop();
        }
    }
    rec(n, len, 0, &mut cur, &mut out);
    out
}

/// Ordered variable set shared by every polynomial built over it.
///
/// Order: `x_1..x_n`, `u^1..u^m`, jet variables graded by order and then
/// lexicographic in `(mu, I)`, then named extras in declaration order.
#[derive(Debug, PartialEq, Eq)]
pub struct VarTable {
    n: usize,
    m: usize,
    max_jet_order: usize,
    vars: Vec<Var>,
    lookup: HashMap<Var, usize>,
}

impl VarTable {
    /// Jet coordinates on `J^r_{n,m}`.
    pub fn jet_space(n: usize, m: usize, max_jet_order: usize) -> Result<Arc<VarTable>> {
        Self::jet_with_extras(n, m, max_jet_order, &[] as &[&str])
    }

    pub fn jet_with_extras<S: AsRef<str>>(
        n: usize,
        m: usize,
        max_jet_order: usize,
        extras: &[S],
    ) -> Result<Arc<VarTable>> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidDimensions { n, m });
        }
        let mut vars: Vec<Var> = (0..n).map(Var::X).chain((0..m).map(Var::U)).collect();
        for order in 1..=max_jet_order {
            let indices = sorted_multi_indices(n, order);
            for mu in 0..m {
                for index in &indices {
                    vars.push(Var::Jet { mu, index: index.clone() });
                }
            }
        }
        vars.extend(extras.iter().map(|s| Var::Named(s.as_ref().to_string())));
        Self::build(n, m, max_jet_order, vars)
    }

    /// A table of named variables only, without jet structure.
    pub fn plain<S: AsRef<str>>(names: &[S]) -> Result<Arc<VarTable>> {
        let vars = names.iter().map(|s| Var::Named(s.as_ref().to_string())).collect();
        Self::build(0, 0, 0, vars)
    }

    fn build(n: usize, m: usize, max_jet_order: usize, vars: Vec<Var>) -> Result<Arc<VarTable>> {
        let mut lookup = HashMap::with_capacity(vars.len());
        for (k, v) in vars.iter().enumerate() {
            if let Var::Named(name) = v {
                let clashes = name == "i" || vars[..k].iter().any(|w| w.to_string() == *name);
                if clashes || !is_identifier(name) {
                    return Err(Error::UnknownVariable(format!("invalid or duplicate name {name}")));
                }
            }
            lookup.insert(v.clone(), k);
        }
        Ok(Arc::new(VarTable { n, m, max_jet_order, vars, lookup }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_jet_order(&self) -> usize {
        self.max_jet_order
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, id: usize) -> &Var {
        &self.vars[id]
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn id_of(&self, v: &Var) -> Option<usize> {
        self.lookup.get(v).copied()
    }

    pub fn x(&self, i: usize) -> usize {
        assert!(i < self.n, "x index out of range");
        i
    }

    pub fn u(&self, mu: usize) -> usize {
        assert!(mu < self.m, "u index out of range");
        self.n + mu
    }

    /// Jet variable `u^mu_I`; the index is sorted before lookup.
    pub fn jet(&self, mu: usize, index: &[usize]) -> Option<usize> {
        let mut index = index.to_vec();
        index.sort_unstable();
        self.id_of(&Var::Jet { mu, index })
    }

    pub fn named(&self, name: &str) -> Option<usize> {
        self.id_of(&Var::Named(name.to_string()))
    }

    pub fn jet_order(&self, id: usize) -> usize {
        self.vars[id].jet_order()
    }

    /// True for `x_i` and `u^mu`.
    pub fn is_base(&self, id: usize) -> bool {
        id < self.n + self.m
    }

    pub fn name(&self, id: usize) -> String {
        self.vars[id].to_string()
    }

    /// Resolves a printed name (`x2`, `u1`, `p1_2`, `p1_1_2`, or a named extra).
    pub fn lookup_name(&self, name: &str) -> Option<usize> {
        if let Some(id) = self.named(name) {
            return Some(id);
        }
        let parse_idx = |s: &str| -> Option<usize> {
            if s.is_empty() || s.starts_with('0') {
                return None;
            }
            s.parse::<usize>().ok()?.checked_sub(1)
        };
        let var = if let Some(rest) = name.strip_prefix('x') {
            Var::X(parse_idx(rest)?)
        } else if let Some(rest) = name.strip_prefix('u') {
            Var::U(parse_idx(rest)?)
        } else if let Some(rest) = name.strip_prefix('p') {
            let mut parts = rest.split('_');
            let mu = parse_idx(parts.next()?)?;
            let mut index = parts.map(parse_idx).collect::<Option<Vec<_>>>()?;
            if index.is_empty() {
                return None;
            }
            index.sort_unstable();
            Var::Jet { mu, index }
        } else {
            return None;
        };
        self.id_of(&var)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_n2_m1() {
        let t = VarTable::jet_space(2, 1, 2).unwrap();
        let names: Vec<String> = (0..t.len()).map(|k| t.name(k)).collect();
        assert_eq!(names, ["x1", "x2", "u1", "p1_1", "p1_2", "p1_1_1", "p1_1_2", "p1_2_2"]);
    }

    #[test]
    fn jet_lookup_sorts_indices() {
        let t = VarTable::jet_space(2, 2, 3).unwrap();
        assert_eq!(t.jet(1, &[1, 0]), t.jet(1, &[0, 1]));
        assert_eq!(t.lookup_name("p2_2_1"), t.jet(1, &[0, 1]));
        assert_eq!(t.jet_order(t.jet(0, &[1, 1, 0]).unwrap()), 3);
        assert!(t.jet(0, &[0, 0, 0, 0]).is_none());
        assert!(t.lookup_name("x3").is_none());
        assert!(t.lookup_name("x0").is_none());
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert_eq!(VarTable::jet_space(0, 1, 2).unwrap_err(), Error::InvalidDimensions { n: 0, m: 1 });
        assert!(VarTable::jet_space(1, 0, 2).is_err());
    }

    #[test]
    fn extras_follow_jets() {
        let t = VarTable::jet_with_extras(1, 1, 1, &["zeta1", "zeta2"]).unwrap();
        assert_eq!(t.named("zeta1"), Some(3));
        assert_eq!(t.lookup_name("zeta2"), Some(4));
        assert!(VarTable::jet_with_extras(1, 1, 1, &["x1"]).is_err());
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(sorted_multi_indices(3, 2).len(), 6);
        assert_eq!(sorted_multi_indices(2, 3), vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
    }
}
