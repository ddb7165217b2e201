use std::time::Instant;

use jetsym::algebra::{flat_generators, same_span};
use jetsym::determining::symmetry_algebra;
use jetsym::jet::{JetContext, PDESystem};
use jetsym::GaussScalar;

#[test]
fn flat_symmetry_algebra_matches_generators() {
    for (n, m, dim) in [(1, 1, 8), (2, 1, 15), (1, 2, 15), (2, 2, 24)] {
        let start = Instant::now();
        let ctx = JetContext::new(n, m).unwrap();
        let origin = vec![GaussScalar::zero(); n + m];
        let alg = symmetry_algebra(&PDESystem::flat(&ctx), 3, &origin).unwrap();
        assert_eq!(alg.dimension(), dim, "({n},{m})");
        let gens = flat_generators(n, m).unwrap();
        assert!(same_span(&alg.basis, gens.fields()), "({n},{m})");
        eprintln!("({n},{m}) in {:?}", start.elapsed());
    }
}
