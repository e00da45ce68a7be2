use kodaira::elliptic::EllipticPoint;
use kodaira::generic_points::{certificate_for_multipliers, find_generic_points_exact, verify_certificate, SearchOptions};
use kodaira::scalar::Rational;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Affine point on `y² = x³ + x + 1`, `None` for the point at infinity.
type Pt = Option<(BigRational, BigRational)>;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn add(p: &Pt, q: &Pt) -> Pt {
    let (Some((x1, y1)), Some((x2, y2))) = (p, q) else {
        return p.clone().or_else(|| q.clone());
    };
    let slope = if x1 == x2 {
        if (y1 + y2).is_zero() {
            return None;
        }
        (r(3, 1) * x1 * x1 + BigRational::one()) / (r(2, 1) * y1)
    } else {
        (y2 - y1) / (x2 - x1)
    };
    let x3 = &slope * &slope - x1 - x2;
    let y3 = slope * (x1 - &x3) - y1;
    Some((x3, y3))
}

fn neg(p: &Pt) -> Pt {
    p.as_ref().map(|(x, y)| (x.clone(), -y))
}

fn times(p: &Pt, n: i64) -> Pt {
    let step = if n < 0 { neg(p) } else { p.clone() };
    (0..n.unsigned_abs()).fold(None, |acc, _| add(&acc, &step))
}

fn oracle_generic(multipliers: &[i64]) -> bool {
    let p: Pt = Some((r(0, 1), r(1, 1)));
    let delta: Pt = Some((r(1, 4), r(-9, 8)));
    let bad = |q: &Pt| q.is_none() || *q == delta || *q == neg(&delta);
    let pts: Vec<Pt> = multipliers.iter().map(|&m| times(&p, m)).collect();
    if pts.iter().any(bad) {
        return false;
    }
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            if i != j && bad(&add(&pts[j], &neg(&pts[i]))) {
                return false;
            }
        }
    }
    true
}

fn to_oracle(p: &EllipticPoint<kodaira::scalar::QuadExt>) -> Pt {
    match p {
        EllipticPoint::Infinity => None,
        EllipticPoint::Affine { x, y } => {
            assert!(x.as_rational().is_some() && y.as_rational().is_some());
            Some((x.a().as_big_rational().clone(), y.a().as_big_rational().clone()))
        }
    }
}

#[test]
fn certificates_match_the_oracle() {
    let opts = SearchOptions::default();
    for rank in 2..=12 {
        let cert = find_generic_points_exact(&Rational::one(), rank, &opts).unwrap();
        assert!(verify_certificate(&cert));
        assert!(oracle_generic(&cert.multipliers), "r = {rank}: {:?}", cert.multipliers);
        let p: Pt = Some((r(0, 1), r(1, 1)));
        for (m, pt) in cert.multipliers.iter().zip(&cert.points) {
            assert_eq!(to_oracle(pt), times(&p, *m));
        }
    }
}

#[test]
fn verifier_agrees_with_oracle_on_strides() {
    let base = EllipticPoint::affine(Rational::zero(), Rational::one());
    for stride in 1..=4i64 {
        for rank in 2..=6i64 {
            let multipliers: Vec<i64> = (2..=rank).map(|i| stride * i).collect();
            let cert = certificate_for_multipliers(&Rational::one(), base.clone(), &multipliers).unwrap();
            assert_eq!(
                verify_certificate(&cert),
                oracle_generic(&multipliers),
                "stride {stride}, r = {rank}"
            );
        }
    }
}

#[test]
fn substituting_delta_breaks_the_certificate() {
    let cert = find_generic_points_exact(&Rational::one(), 6, &SearchOptions::default()).unwrap();
    for i in 0..cert.points.len() {
        for bad in [cert.delta.clone(), EllipticPoint::Infinity] {
            let mut c = cert.clone();
            c.points[i] = bad;
            assert!(!verify_certificate(&c));
        }
    }
}
