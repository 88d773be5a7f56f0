use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(7)
}

fn random_elem(r: &WittRing, rng: &mut ChaCha8Rng) -> WittElem {
    let code = rng.gen_range(0..r.size().unwrap());
    r.element_from_code(code)
}

#[test]
fn field_inverse_small_cases() {
    let f = WittRing::field(5, 1).unwrap();
    assert!(f.one().inv().unwrap().is_one());
    assert_eq!(f.from_int(2).inv().unwrap(), f.from_int(3));
    assert_eq!(f.zero().inv().unwrap_err(), RingError::ZeroInverse);
}

#[test]
fn lagrange_on_random_units() {
    let f = WittRing::field(5, 2).unwrap();
    let mut rng = rng();
    let mut seen = 0;
    while seen < 200 {
        let a = random_elem(&f, &mut rng);
        if a.is_zero() {
            continue;
        }
        assert!(a.pow(24).is_one());
        seen += 1;
    }
}

#[test]
fn ff_arith_rejects_mixed_rings() {
    let a = WittRing::field(5, 1).unwrap().one();
    let b = WittRing::field(5, 2).unwrap().one();
    assert!(matches!(
        ff_arith(&a, &b, FieldOp::Add),
        Err(RingError::ParamMismatch(..))
    ));
}

#[test]
fn teichmuller_examples() {
    let f = WittRing::field(5, 1).unwrap();
    let t = teichmuller(&f.from_int(2), 2).unwrap();
    assert_eq!(t.coeffs(), &[7]);
    assert!(teichmuller(&f.one(), 4).unwrap().is_one());
}

#[test]
fn teichmuller_is_multiplicative_on_f25() {
    let f = WittRing::field(5, 2).unwrap();
    let lifts: Vec<WittElem> = f.elements().map(|a| teichmuller(&a, 3).unwrap()).collect();
    let elems: Vec<WittElem> = f.elements().collect();
    for (i, a) in elems.iter().enumerate() {
        assert_eq!(lifts[i].residue(), *a);
        for (j, b) in elems.iter().enumerate() {
            let ab = a * b;
            let k = ab.code() as usize;
            assert_eq!(&lifts[i] * &lifts[j], lifts[k]);
        }
    }
}

#[test]
fn frobenius_basics() {
    let r1 = WittRing::new(5, 1, 3).unwrap();
    for x in r1.elements().take(50) {
        assert_eq!(x.frobenius(), x);
    }
    let r = WittRing::new(5, 2, 2).unwrap();
    for x in r.elements() {
        assert_eq!(x.frobenius().frobenius(), x);
        assert_eq!(x.frobenius().residue(), x.residue().pow(5));
    }
    let mut rng = rng();
    for _ in 0..1000 {
        let x = random_elem(&r, &mut rng);
        let y = random_elem(&r, &mut rng);
        assert_eq!((&x + &y).frobenius(), &x.frobenius() + &y.frobenius());
        assert_eq!((&x * &y).frobenius(), &x.frobenius() * &y.frobenius());
    }
}

#[test]
fn fixed_point_counts() {
    for d in 1..=2usize {
        for m in 1..=2u32 {
            let r = WittRing::new(5, d, m).unwrap();
            for d0 in 1..=2usize {
                let fixed = r.elements().filter(|x| x.in_subring_gcd(d0)).count();
                let g = crate::arith::gcd(d0 as u64, d as u64) as u32;
                assert_eq!(fixed as u64, 5u64.pow(m * g), "d={d} m={m} d0={d0}");
            }
        }
    }
}

#[test]
fn subring_membership() {
    let r = WittRing::new(5, 2, 2).unwrap();
    assert!(in_subring(&r.one(), 1).unwrap());
    assert_eq!(r.elements().filter(|x| in_subring(x, 1).unwrap()).count(), 25);
    let f = WittRing::field(5, 2).unwrap();
    for a in f.elements().filter(|a| !a.in_subring_gcd(1)) {
        assert!(!in_subring(&teichmuller(&a, 2).unwrap(), 1).unwrap());
    }
    assert_eq!(
        in_subring(&r.one(), 3).unwrap_err(),
        RingError::NonDivisibleDegrees(3, 2)
    );
}

#[test]
fn embedding_is_a_ring_map() {
    let small = WittRing::new(5, 1, 2).unwrap();
    assert!(embed(&small.one(), 2).unwrap().is_one());
    // Teichmuller naturality: the image of 7 = omega(2) is omega(2) in W(F_25).
    let seven = small.from_int(7);
    let big_field = WittRing::field(5, 2).unwrap();
    let expected = teichmuller(&big_field.from_int(2), 2).unwrap();
    assert_eq!(embed(&seven, 2).unwrap(), expected);

    let r2 = WittRing::new(5, 2, 2).unwrap();
    let mut rng = rng();
    for _ in 0..1000 {
        let x = random_elem(&r2, &mut rng);
        let y = random_elem(&r2, &mut rng);
        let ex = embed(&x, 4).unwrap();
        let ey = embed(&y, 4).unwrap();
        assert_eq!(embed(&(&x * &y), 4).unwrap(), &ex * &ey);
        assert_eq!(embed(&(&x + &y), 4).unwrap(), &ex + &ey);
        // commutes with Frobenius^... image is fixed by Frobenius^2
        assert!(ex.in_subring_gcd(2));
        assert_eq!(embed(&x.frobenius(), 4).unwrap(), ex.frobenius());
    }
}

#[test]
fn embedding_chain_and_reduction_commute() {
    let r = WittRing::new(5, 1, 3).unwrap();
    let mut rng = rng();
    let r2 = WittRing::new(5, 2, 3).unwrap();
    for _ in 0..200 {
        let x = random_elem(&r2, &mut rng);
        let via = embed(&embed(&x, 4).unwrap(), 8).unwrap();
        assert_eq!(embed(&x, 8).unwrap(), via);
        assert_eq!(
            embed(&x, 4).unwrap().reduce_to(2).unwrap(),
            embed(&x.reduce_to(2).unwrap(), 4).unwrap()
        );
    }
    let x = r.from_int(3);
    assert_eq!(embed(&x, 2).unwrap(), r.with_degree(2).unwrap().from_int(3));
    assert!(matches!(
        embed(&r2.one(), 3),
        Err(RingError::NonDivisibleDegrees(2, 3))
    ));
}

#[test]
fn hensel_root_examples() {
    let z25 = WittRing::new(5, 1, 2).unwrap();
    let c = z25.from_int(13);
    let lin = vec![-&c, z25.one()];
    assert_eq!(hensel_root(&lin, &c.residue()).unwrap(), c);
    let p = poly::from_ints(&z25, &[1, 0, 1]);
    let f5 = WittRing::field(5, 1).unwrap();
    assert_eq!(hensel_root(&p, &f5.from_int(2)).unwrap(), z25.from_int(7));
    // derivative of (x-1)^2 vanishes at 1
    let sq = poly::from_ints(&z25, &[1, -2, 1]);
    assert_eq!(
        hensel_root(&sq, &f5.one()).unwrap_err(),
        RingError::NotASimpleRoot
    );
}

#[test]
fn hensel_root_on_random_quadratics() {
    let ring = WittRing::new(5, 2, 3).unwrap();
    let f = ring.residue_field();
    let mut rng = rng();
    let mut done = 0;
    while done < 500 {
        let a = random_elem(&f, &mut rng);
        let b = random_elem(&f, &mut rng);
        if a == b {
            continue;
        }
        // (x - a')(x - b') + ell * noise has simple residual roots a, b
        let al = a.lift_to(3).unwrap();
        let bl = b.lift_to(3).unwrap();
        let noise = random_elem(&ring, &mut rng).times_ell_pow(1);
        let p = vec![&(&al * &bl) + &noise, -&(&al + &bl), ring.one()];
        let r = hensel_root(&p, &a).unwrap();
        assert!(poly::eval(&p, &r).is_zero());
        assert_eq!(r.residue(), a);
        done += 1;
    }
}

#[test]
fn hensel_root_is_unique_exhaustively() {
    let ring = WittRing::new(5, 2, 2).unwrap(); // 625 elements
    let p = poly::from_ints(&ring, &[2, 0, 1]); // x^2 + 2, irreducible over F_5
    let g = ring.gen().residue();
    let roots: Vec<_> = ring.elements().filter(|x| poly::eval(&p, x).is_zero()).collect();
    let r = hensel_root(&p, &g).unwrap();
    let congruent: Vec<_> = roots.iter().filter(|x| x.residue() == g).collect();
    assert_eq!(congruent, vec![&r]);
}

#[test]
fn serialization_round_trip() {
    let r = WittRing::new(5, 2, 2).unwrap();
    let x = r.from_coeffs(&[7, 3]).unwrap();
    assert_eq!(x.to_string(), "5^2:2:[7,3]");
    assert_eq!(WittElem::parse("5^2:2:[7,3]").unwrap(), x);
    assert!(WittElem::parse("5^2:2:[7]").is_err());
    assert!(WittElem::parse("5^2:2:[25,0]").is_err());
}

#[test]
fn unit_inverse_in_witt_ring() {
    let r = WittRing::new(5, 2, 4).unwrap();
    let mut rng = rng();
    for _ in 0..300 {
        let x = random_elem(&r, &mut rng);
        if x.is_unit() {
            assert!((&x * &x.inv().unwrap()).is_one());
        } else {
            assert!(x.inv().is_err());
        }
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn ring_axioms(a in 0u128..15625, b in 0u128..15625, c in 0u128..15625) {
            let r = WittRing::new(5, 2, 3).unwrap();
            let (x, y, z) = (r.element_from_code(a), r.element_from_code(b), r.element_from_code(c));
            prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
            prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
            prop_assert_eq!(&x * &y, &y * &x);
            prop_assert_eq!((&x * &y).reduce_to(2).unwrap(),
                &x.reduce_to(2).unwrap() * &y.reduce_to(2).unwrap());
        }

        #[test]
        fn text_form_round_trips(a in 0u128..15625) {
            let x = WittRing::new(5, 2, 3).unwrap().element_from_code(a);
            prop_assert_eq!(WittElem::parse(&x.to_string()).unwrap(), x);
        }
    }
}
