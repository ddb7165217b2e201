use jetsym::algebra::same_span;
use jetsym::determining::{residual_vanishes, symmetry_algebra, taylor_from_initial_data, InitialData, TaylorRecursion};
use jetsym::expr::parse_poly;
use jetsym::jet::{involutivity_check, JetContext};
use jetsym::prolong::lie_criterion_check;
use jetsym::segre::{cr_automorphism_algebra, segre_context, segre_system, DefiningSeries, Signature};
use jetsym::GaussScalar;

fn perturbed() -> DefiningSeries {
    let ctx = segre_context(1).unwrap();
    let r = parse_poly("x1^2*zeta1 + u1*zeta1^2", ctx.table()).unwrap();
    DefiningSeries::new(Signature::positive(1), &r).unwrap()
}

#[test]
fn perturbed_segre_system_round_trips_initial_data() {
    let sys = segre_system(&perturbed(), 6).unwrap();
    assert!(involutivity_check(&sys).unwrap().is_involutive());
    let origin = vec![GaussScalar::zero(); 2];
    let zero = taylor_from_initial_data(&sys, &origin, &InitialData::zero(1, 1), 3).unwrap();
    assert!(zero.is_zero());
    let alg = symmetry_algebra(&sys, 3, &origin).unwrap();
    assert!(alg.dimension() <= 8);
    for f in &alg.basis {
        assert!(residual_vanishes(f, &sys, &origin, 1).unwrap());
        let omega = InitialData::of_field(f, &origin).unwrap();
        assert_eq!(&taylor_from_initial_data(&sys, &origin, &omega, 3).unwrap(), f);
    }
    let rec = TaylorRecursion::new(&sys, origin.clone(), 3).unwrap();
    let from_omega: Vec<_> = rec.admissible_initial_data().iter().map(|w| rec.field_for(w).unwrap()).collect();
    assert!(same_span(&from_omega, &alg.basis));
}

#[test]
fn hyperquadric_fields_preserve_the_segre_family() {
    for sig in ["+", "++", "+-"] {
        let sig: Signature = sig.parse().unwrap();
        let n = sig.n();
        let sys = segre_system(&DefiningSeries::hyperquadric(sig.clone()).unwrap(), 6).unwrap();
        let aut = cr_automorphism_algebra(&sig).unwrap();
        assert_eq!(aut.real_dimension(), n * n + 4 * n + 3);
        for f in &aut.basis {
            assert!(lie_criterion_check(f, &sys).unwrap().values().all(|r| r.is_zero()), "{f}");
        }
        let origin = vec![GaussScalar::zero(); n + 1];
        let complex = symmetry_algebra(&sys, 3, &origin).unwrap();
        assert!(aut.real_dimension() <= complex.dimension());
        assert_eq!(sys.ctx(), &JetContext::new(n, 1).unwrap());
    }
}
