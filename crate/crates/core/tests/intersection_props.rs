use kodaira::intersection::{
    build_table, canonical_divisor, derive_k_squared, intersect, k_squared_value, representatives, solve_adjunction,
    BasisClass, DivisorExpr, Family, IntersectionTable, Term, Transcript,
};
use kodaira::scalar::{Rational, SymbolicScalar};
use proptest::prelude::*;

fn term() -> impl Strategy<Value = Term> {
    let classes = representatives();
    prop_oneof![
        (0..classes.len()).prop_map(move |i| Term::Class(classes[i])),
        prop_oneof![Just(Family::Fibers(1)), Just(Family::Fibers(2)), Just(Family::Sections)].prop_map(Term::Family),
    ]
}

fn divisor() -> impl Strategy<Value = DivisorExpr> {
    prop::collection::vec((term(), -3i64..=3), 1..5).prop_map(|terms| {
        terms
            .into_iter()
            .fold(DivisorExpr::zero(), |d, (t, c)| d.plus(t, SymbolicScalar::int(c)))
    })
}

fn resolved_table() -> IntersectionTable {
    let table = build_table();
    let sol = solve_adjunction(&table, &mut Transcript::default()).unwrap();
    table.resolved(&sol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_is_symmetric(a in divisor(), b in divisor()) {
        for table in [build_table(), resolved_table()] {
            prop_assert_eq!(intersect(&a, &b, &table), intersect(&b, &a, &table));
        }
    }

    #[test]
    fn pairing_is_bilinear(a in divisor(), b in divisor(), c in divisor(), k in -4i64..=4) {
        let table = build_table();
        let lhs = intersect(&a.add(&b), &c, &table);
        let rhs = intersect(&a, &c, &table).add(&intersect(&b, &c, &table));
        prop_assert!(lhs.sub(&rhs).is_zero());
        let k = SymbolicScalar::int(k);
        prop_assert!(intersect(&a.scale(&k), &c, &table).sub(&k.mul(&intersect(&a, &c, &table))).is_zero());
    }
}

#[test]
fn lookup_table_is_symmetric() {
    assert!(build_table().is_symmetric());
    assert!(resolved_table().is_symmetric());
}

#[test]
fn zero_divisor_pairs_to_zero() {
    let w = canonical_divisor(1).unwrap();
    assert!(intersect(&DivisorExpr::zero(), &w, &build_table()).is_zero());
}

/// Independent expansion with every fibre and section written out, for
/// concrete `r` and `γ`, using `R² = −N`, `R·g⁻¹(s) = N`, `N = (γ − 1)/r`.
fn explicit_k_squared(r: i64, gamma: i64) -> Rational {
    #[derive(Clone, Copy, PartialEq)]
    enum C {
        F(u8, i64),
        R(i64),
        P(u8, u8),
    }
    let n = Rational::new(gamma - 1, r).unwrap();
    let pair = |a: C, b: C| -> Rational {
        match (a, b) {
            (C::F(..), C::F(..)) | (C::P(..), C::P(..)) => Rational::zero(),
            (C::F(..), C::R(_)) | (C::R(_), C::F(..)) => Rational::one(),
            (C::F(..), C::P(..)) | (C::P(..), C::F(..)) => Rational::from(2),
            (C::R(i), C::R(j)) if i == j => -n.clone(),
            (C::R(_), C::R(_)) => Rational::zero(),
            (C::R(_), C::P(..)) | (C::P(..), C::R(_)) => n.clone(),
        }
    };
    let w = |k: u8| -> Vec<C> {
        let mut v: Vec<C> = (1..=2 * gamma - 2).map(|i| C::F(k, i)).collect();
        v.push(C::P(k, 0));
        v.push(C::P(k, 1));
        v.extend((1..=r).map(C::R));
        v
    };
    let (w1, w2) = (w(1), w(2));
    let mut total = Rational::zero();
    for a in &w1 {
        for b in &w2 {
            total = &total + &pair(*a, *b);
        }
    }
    total
}

#[test]
fn symbolic_k_squared_matches_explicit_expansion() {
    let d = derive_k_squared().unwrap();
    for r in 1..=12i64 {
        for gamma in 2..=9i64 {
            let mut env = std::collections::BTreeMap::new();
            env.insert(kodaira::scalar::Symbol::R, Rational::from(r));
            env.insert(kodaira::scalar::Symbol::Gamma, Rational::from(gamma));
            let symbolic = d.k_squared.eval(&env).unwrap().unwrap();
            assert_eq!(symbolic, explicit_k_squared(r, gamma), "r = {r}, γ = {gamma}");
            assert_eq!(symbolic, k_squared_value(r, gamma));
        }
    }
}

#[test]
fn member_placeholders_do_not_leak_into_results() {
    let table = build_table();
    let a = DivisorExpr::family(Family::Sections);
    let b = DivisorExpr::class(BasisClass::Section { j: 1 });
    let v = intersect(&a, &b, &table);
    assert_eq!(v, SymbolicScalar::symbol(kodaira::scalar::Symbol::SectionSquare));
}
