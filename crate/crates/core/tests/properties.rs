//! Property tests for the algebraic invariants.

use eisfe::degree2::{smith_profile, valuation};
use eisfe::exactscalar::{rat, GaussRational, QuadScalar};
use eisfe::fpforms::{disc_character, legendre, rank_mod_p, CharacterKind, FpSymMatrix};
use eisfe::ratfunc::{AffineExponent, Poly, RatFunc};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const P: u64 = 3;

fn gauss() -> impl Strategy<Value = GaussRational> {
    (-9i64..=9, 1i64..=4, -9i64..=9, 1i64..=4).prop_map(|(a, b, c, d)| GaussRational::new(rat(a, b), rat(c, d)))
}

fn scalar() -> impl Strategy<Value = QuadScalar> {
    (gauss(), gauss()).prop_map(|(a, b)| QuadScalar::new(P, a, b))
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(scalar(), 0..4).prop_map(|c| Poly::new(P, c))
}

fn nonzero_poly() -> impl Strategy<Value = Poly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

fn ratfunc() -> impl Strategy<Value = RatFunc> {
    (poly(), nonzero_poly()).prop_map(|(n, d)| RatFunc::new(n, d).unwrap())
}

fn point() -> impl Strategy<Value = QuadScalar> {
    (-20i64..=20, 1i64..=7).prop_map(|(a, b)| QuadScalar::from_rational(P, rat(a, b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scalar_ring_axioms(x in scalar(), y in scalar(), z in scalar()) {
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert!((&x - &x).is_zero());
    }

    #[test]
    fn scalar_inverse(x in scalar()) {
        prop_assume!(!x.is_zero());
        prop_assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn scalar_norm_multiplicative(x in scalar(), y in scalar()) {
        prop_assert_eq!((&x * &y).norm(), &x.norm() * &y.norm());
    }

    #[test]
    fn ratfunc_canonical_form_unique(f in ratfunc(), c in nonzero_poly()) {
        let g = RatFunc::new(f.num().mul(&c), f.den().mul(&c)).unwrap();
        prop_assert!(g.identical(&f));
    }

    #[test]
    fn ratfunc_field_ops(f in ratfunc(), g in ratfunc()) {
        prop_assert_eq!(f.add(&g).sub(&g), f.clone());
        if !g.is_zero() {
            prop_assert!(f.mul(&g).div(&g).unwrap().identical(&f));
        }
    }

    #[test]
    fn substitution_is_involution(f in ratfunc(), n in 1u32..6) {
        prop_assert!(f.substitute_fe(n).substitute_fe(n).identical(&f));
    }

    #[test]
    fn substitution_is_ring_map(f in ratfunc(), g in ratfunc(), n in 1u32..6) {
        prop_assert_eq!(f.mul(&g).substitute_fe(n), f.substitute_fe(n).mul(&g.substitute_fe(n)));
        prop_assert_eq!(f.add(&g).substitute_fe(n), f.substitute_fe(n).add(&g.substitute_fe(n)));
    }

    #[test]
    fn evaluation_commutes(f in ratfunc(), g in ratfunc(), x in point()) {
        if let (Ok(a), Ok(b)) = (f.eval(&x), g.eval(&x)) {
            prop_assert_eq!(f.add(&g).eval(&x).unwrap(), &a + &b);
            prop_assert_eq!(f.mul(&g).eval(&x).unwrap(), &a * &b);
        }
    }

    #[test]
    fn exponent_symmetry(n in 1i64..40, k in -40i64..40, j in 0i64..40) {
        prop_assume!(j <= n);
        let e = AffineExponent::exponent_l(n, k, j);
        prop_assert_eq!(e.clone(), AffineExponent::exponent_l(n, k, n - j).reflect(n));
        prop_assert_eq!(e.reflect(n).reflect(n), e);
    }

    #[test]
    fn disc_character_gl_invariant(
        p in prop::sample::select(vec![3u64, 5, 7]),
        l in 1usize..=3,
        seed in any::<u64>(),
        gamma in prop::collection::vec(0u64..1000, 9),
    ) {
        let u = FpSymMatrix::from_index(p, l, seed % p.pow((l * (l + 1) / 2) as u32));
        let g: Vec<u64> = gamma[..l * l].iter().map(|x| x % p).collect();
        prop_assume!(rank_mod_p(p, l, l, &g) == l);
        let v = u.congruent(&g);
        for psi in [CharacterKind::Trivial, CharacterKind::Quadratic] {
            prop_assert_eq!(disc_character(&u, psi), disc_character(&v, psi));
        }
    }

    #[test]
    fn smith_multiplicative(
        a in prop::collection::vec(-30i64..30, 3),
        b in prop::collection::vec(-30i64..30, 3),
        e in 1u32..3,
        f in 1u32..3,
    ) {
        // R_p has a 3-power denominator, R_q a 5-power denominator
        let sym = |v: &[i64], d: i64| -> Vec<Vec<BigRational>> {
            vec![vec![rat(v[0], d), rat(v[1], d)], vec![rat(v[1], d), rat(v[2], d)]]
        };
        let rp = sym(&a, 3i64.pow(e));
        let rq = sym(&b, 5i64.pow(f));
        let sum: Vec<Vec<BigRational>> =
            (0..2).map(|i| (0..2).map(|j| &rp[i][j] + &rq[i][j]).collect()).collect();
        for psi in [CharacterKind::Trivial, CharacterKind::Quadratic] {
            let (s, sp, sq) = (smith_profile(&sum, 3, psi), smith_profile(&rp, 3, psi), smith_profile(&rq, 3, psi));
            prop_assert_eq!(&s.delta, &(&sp.delta * &sq.delta));
            let psi_dq = psi.eval(i64::try_from(&sq.delta % BigInt::from(3)).unwrap(), 3);
            prop_assert_eq!(s.psi_tilde, sp.psi_tilde * psi_dq);
        }
    }

    /// δ, ν and ψ̃ of `u/p^e` agree with the invariants read off directly
    /// from valuations, as the local-series enumeration does.
    #[test]
    fn smith_matches_direct_invariants(u in prop::collection::vec(-200i64..200, 3), e in 1u32..4) {
        let p = 3i64;
        let pe = p.pow(e);
        let rm = vec![vec![rat(u[0], pe), rat(u[1], pe)], vec![rat(u[1], pe), rat(u[2], pe)]];
        let sp = smith_profile(&rm, 3, CharacterKind::Quadratic);
        let vals = |x: i64| if x == 0 { e } else { valuation(x, 3).min(e) };
        let b1 = vals(u[0]).min(vals(u[1])).min(vals(u[2]));
        if b1 == e {
            prop_assert_eq!(sp.delta, BigInt::from(1));
            prop_assert_eq!(sp.nu, 2);
            prop_assert_eq!(sp.psi_tilde, 1);
        } else {
            let d = u[0] * u[2] - u[1] * u[1];
            let vd = if d == 0 { e + b1 + 1 } else { valuation(d, 3) };
            let b2 = (vd - b1).min(e);
            prop_assert_eq!(sp.delta, BigInt::from(p.pow(2 * e - b1 - b2)));
            let pb1 = p.pow(b1);
            if b2 == e {
                prop_assert_eq!(sp.nu, 1);
                let x = u[0] / pb1;
                let unit = if x % p != 0 { x } else { u[2] / pb1 };
                prop_assert_eq!(sp.psi_tilde, legendre(unit, 3));
            } else {
                prop_assert_eq!(sp.nu, 0);
                prop_assert_eq!(sp.psi_tilde, legendre(d / p.pow(vd), 3));
            }
        }
    }
}
