use proptest::prelude::*;

use jetsym::algebra::bracket;
use jetsym::expr::parse_poly;
use jetsym::jet::{total_derivative, JetContext};
use jetsym::prolong::{prolong, prolong_coefficient_via, VectorField};
use jetsym::{GaussScalar, Monomial, Poly};

type Raw = Vec<(GaussScalar, Vec<u16>)>;

fn scalar() -> impl Strategy<Value = GaussScalar> {
    (-4i64..=4, 1i64..=3, -2i64..=2).prop_map(|(a, b, c)| &GaussScalar::from_ratio(a, b) + &(&GaussScalar::from(c) * &GaussScalar::i()))
}

/// Up to `terms` terms over the first `vars` variables, exponents `≤ max_exp`.
fn raw(vars: usize, max_exp: u16, terms: usize) -> impl Strategy<Value = Raw> {
    prop::collection::vec((scalar(), prop::collection::vec(0..=max_exp, vars)), 0..=terms)
}

fn build(ctx: &JetContext, raw: &Raw, ids: &[usize]) -> Poly {
    let t = ctx.table();
    let terms = raw.iter().map(|(c, e)| {
        let mut exps = vec![0u16; t.len()];
        for (k, &id) in ids.iter().enumerate() {
            exps[id] = e[k];
        }
        (Monomial::from_exponents(exps), c.clone())
    });
    Poly::from_terms(t, terms.collect::<Vec<_>>())
}

fn ctx21() -> JetContext {
    JetContext::new(2, 1).unwrap()
}

/// `x1, x2, u1, p1_1, p1_2`.
fn first_order_ids(ctx: &JetContext) -> Vec<usize> {
    vec![0, 1, 2, ctx.p_id(0, 0), ctx.p_id(0, 1)]
}

fn field(ctx: &JetContext, comps: &[Raw]) -> VectorField {
    let base: Vec<usize> = (0..ctx.n() + ctx.m()).collect();
    let mut theta: Vec<Poly> = comps.iter().map(|r| build(ctx, r, &base)).collect();
    let eta = theta.split_off(ctx.n());
    VectorField::new(ctx, theta, eta).unwrap()
}

fn field_strategy(max_exp: u16) -> impl Strategy<Value = Vec<Raw>> {
    prop::collection::vec(raw(3, max_exp, 3), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_axioms(a in raw(5, 2, 4), b in raw(5, 2, 4), c in raw(5, 2, 4)) {
        let ctx = ctx21();
        let ids = first_order_ids(&ctx);
        let (f, g, h) = (build(&ctx, &a, &ids), build(&ctx, &b, &ids), build(&ctx, &c, &ids));
        let zero = Poly::zero(ctx.table());
        let one = Poly::one(ctx.table());
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&f + &zero, f.clone());
        prop_assert_eq!(&f * &one, f.clone());
        prop_assert!((&f - &f).is_zero());
        prop_assert!((&f * &zero).is_zero());
    }

    #[test]
    fn leibniz_rule(a in raw(5, 2, 3), b in raw(5, 2, 3), i in 0usize..2) {
        let ctx = ctx21();
        let ids = first_order_ids(&ctx);
        let (f, g) = (build(&ctx, &a, &ids), build(&ctx, &b, &ids));
        let lhs = total_derivative(&ctx, &(&f * &g), i).unwrap();
        let rhs = &(&total_derivative(&ctx, &f, i).unwrap() * &g) + &(&f * &total_derivative(&ctx, &g, i).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn total_derivatives_commute(a in raw(5, 2, 4)) {
        let ctx = ctx21();
        let f = build(&ctx, &a, &first_order_ids(&ctx));
        let d01 = total_derivative(&ctx, &total_derivative(&ctx, &f, 0).unwrap(), 1).unwrap();
        let d10 = total_derivative(&ctx, &total_derivative(&ctx, &f, 1).unwrap(), 0).unwrap();
        prop_assert_eq!(d01, d10);
    }

    #[test]
    fn prolongation_degree_bounds(comps in field_strategy(3)) {
        let ctx = ctx21();
        let x = field(&ctx, &comps);
        let xp = prolong(&x, 2).unwrap();
        let t = ctx.table().clone();
        for ((_, index), eta) in xp.coefficients() {
            let first = |m: &Monomial| m.degree_in(|v| t.jet_order(v) == 1);
            let second = |m: &Monomial| m.degree_in(|v| t.jet_order(v) == 2);
            let max_first = eta.terms().map(|(m, _)| first(m)).max().unwrap_or(0);
            let max_second = eta.terms().map(|(m, _)| second(m)).max().unwrap_or(0);
            if index.len() == 1 {
                prop_assert!(max_first <= 2 && max_second == 0);
            } else {
                prop_assert!(max_first <= 3 && max_second <= 1);
            }
        }
    }

    /// The cubic part of `η_ij` is `-Σ_l θ_{l,uu} p_l p_i p_j` for one dependent variable.
    #[test]
    fn cubic_coefficient(comps in field_strategy(2), i in 0usize..2, j in 0usize..2) {
        let ctx = ctx21();
        let x = field(&ctx, &comps);
        let t = ctx.table().clone();
        let eta = prolong(&x, 2).unwrap().eta_jet(0, &[i, j]).unwrap().clone();
        let cubic = eta.filter_terms(|m| m.degree_in(|v| t.jet_order(v) == 1) == 3);
        let mut want = ctx.zero();
        for l in 0..2 {
            want = &want + &(&x.theta()[l].d(t.u(0)).d(t.u(0)) * &ctx.p(0, l));
        }
        want = -(&(&want * &ctx.p(0, i)) * &ctx.p(0, j));
        prop_assert_eq!(cubic, want);
    }

    #[test]
    fn prolongation_is_index_order_invariant(comps in field_strategy(2)) {
        let ctx = JetContext::new(2, 1).unwrap();
        let x = field(&ctx, &comps);
        let direct = prolong(&x, 2).unwrap().eta_jet(0, &[0, 1]).unwrap().clone();
        prop_assert_eq!(prolong_coefficient_via(&x, 0, &[0, 1], 0).unwrap(), direct.clone());
        prop_assert_eq!(prolong_coefficient_via(&x, 0, &[1, 0], 0).unwrap(), direct);
    }

    #[test]
    fn parser_round_trip(a in raw(5, 3, 5)) {
        let ctx = ctx21();
        let f = build(&ctx, &a, &first_order_ids(&ctx));
        prop_assert_eq!(parse_poly(&f.to_string(), ctx.table()).unwrap(), f);
    }

    #[test]
    fn jacobi_identity(a in field_strategy(2), b in field_strategy(2), c in field_strategy(2)) {
        let ctx = JetContext::new(2, 1).unwrap();
        let (x, y, z) = (field(&ctx, &a), field(&ctx, &b), field(&ctx, &c));
        let sum = bracket(&x, &bracket(&y, &z)).add(&bracket(&y, &bracket(&z, &x))).add(&bracket(&z, &bracket(&x, &y)));
        prop_assert!(sum.is_zero());
    }

    #[test]
    fn bracket_bilinear_antisymmetric(a in field_strategy(2), b in field_strategy(2), c in field_strategy(2), s in scalar()) {
        let ctx = JetContext::new(2, 1).unwrap();
        let (x, y, z) = (field(&ctx, &a), field(&ctx, &b), field(&ctx, &c));
        prop_assert_eq!(bracket(&x, &y), bracket(&y, &x).scale(&GaussScalar::from(-1)));
        prop_assert_eq!(bracket(&x.scale(&s).add(&z), &y), bracket(&x, &y).scale(&s).add(&bracket(&z, &y)));
    }
}
