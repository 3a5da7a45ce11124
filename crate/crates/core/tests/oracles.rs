//! Frozen values and independent oracles.

use eisfe::degree2::{
    chi_n_star_data, discriminant_split, extract_f_q, f_local_p, local_series_bruteforce, padic_normal_form,
    reduced_forms, smith_profile, stabilized_series, verify_f_local_fe, BinaryForm, SeriesKind,
};
use eisfe::exactscalar::{rat, QuadScalar};
use eisfe::fpforms::{CharacterKind, DEFAULT_MAX_ENUM};
use eisfe::functeq::{entries_in_line, eps_over_sqrt_p, fe_matrix, t_matrix};
use eisfe::ratfunc::{Poly, RatFunc};
use eisfe::upoperator::{b_matrix, normalized_eigenvalue, triangular_eigenvectors, up_matrix, EisensteinContext};
use num_traits::ToPrimitive;

fn form(a: i64, b: i64, c: i64) -> BinaryForm {
    BinaryForm::new(a, b, c).unwrap()
}

fn ctx(p: u64, n: u32, psi: CharacterKind) -> EisensteinContext {
    EisensteinContext::new(p, n, EisensteinContext::minimal_weight(p, psi), psi).unwrap()
}

fn rf(p: u64, num: &[i64], den: &[i64]) -> RatFunc {
    RatFunc::new(Poly::from_ints(p, num), Poly::from_ints(p, den)).unwrap()
}

/// `r·i^e·√p^h` as a scalar.
fn scalar(p: u64, r: (i64, i64), i_power: u32, half_p_power: i64) -> QuadScalar {
    let base = QuadScalar::embed(p, rat(r.0, r.1), half_p_power);
    &base * &QuadScalar::i_unit(p).pow(i_power as i64).unwrap()
}

fn poly(p: u64, coeffs: Vec<QuadScalar>) -> Poly {
    Poly::new(p, coeffs)
}

#[test]
fn up_matrix_n1() {
    let c = EisensteinContext::new(3, 1, 4, CharacterKind::Trivial).unwrap();
    let (m, pre) = up_matrix(&c);
    assert_eq!(m.get(0, 0), &RatFunc::from_int(3, 1));
    assert_eq!(m.get(0, 1), &RatFunc::from_rational(3, rat(2, 3)));
    assert!(m.get(1, 0).is_zero());
    assert_eq!(m.get(1, 1), &rf(3, &[1], &[0, 3]));
    assert_eq!(pre.to_json().c0, "2/1");
    assert_eq!(pre.to_json().c1, "-1/1");
}

/// The recursion for B agrees with eigenvectors computed by back substitution.
#[test]
fn b_matrix_matches_eigenvectors() {
    for p in [3, 7] {
        for psi in [CharacterKind::Trivial, CharacterKind::Quadratic] {
            for n in 1..=4 {
                let c = ctx(p, n, psi);
                let (m, _) = up_matrix(&c);
                let eigs: Vec<_> = (0..c.size()).map(|i| normalized_eigenvalue(p, i)).collect();
                let v = triangular_eigenvectors(&m.transpose(), &eigs).unwrap();
                assert_eq!(v.transpose(), b_matrix(&c), "p={p} n={n} {}", psi.name());
            }
        }
    }
}

#[test]
fn fe_matrix_n1_frozen() {
    let c = ctx(3, 1, CharacterKind::Trivial);
    let fe = fe_matrix(&c);
    let expected =
        [[rf(3, &[-2], &[1, -9]), rf(3, &[1, -3], &[1, -9])], [rf(3, &[3, -9], &[1, -9]), rf(3, &[0, -6], &[1, -9])]];
    for (i, row) in expected.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            assert!(fe.get(i, j).identical(e), "FE[{i}][{j}] = {}", fe.get(i, j));
        }
    }
}

#[test]
fn quadratic_fe_entries_lie_in_line() {
    for p in [3, 5, 7] {
        for n in 1..=4 {
            let c = ctx(p, n, CharacterKind::Quadratic);
            let unit = if n % 2 == 1 { eps_over_sqrt_p(p) } else { QuadScalar::one(p) };
            assert!(entries_in_line(&t_matrix(&c), &unit));
            assert!(entries_in_line(&fe_matrix(&c), &unit));
        }
    }
}

#[test]
fn discriminant_examples() {
    let s = discriminant_split(&form(1, 0, 1));
    assert_eq!((s.d_n, s.f), (4, 1));
    let s = discriminant_split(&form(1, 0, 3));
    assert_eq!((s.d_n, s.f, s.f_q.get(&2).copied()), (3, 2, Some(1)));
    let s = discriminant_split(&form(1, 1, 1));
    assert_eq!((s.d_n, s.f), (3, 1));
}

#[test]
fn normal_form_examples() {
    let nf = padic_normal_form(&form(1, 0, 3), 3);
    assert_eq!((nf.m, nf.t, nf.alpha_class), (0, 1, 1));
    let nf = padic_normal_form(&form(1, 0, 1), 3);
    assert_eq!((nf.m, nf.t, nf.alpha_class), (0, 0, 1));
    let nf = padic_normal_form(&form(1, 1, 1), 3);
    assert_eq!((nf.m, nf.t, nf.alpha_class), (0, 1, 1));
}

#[test]
fn profile_examples() {
    let pr = chi_n_star_data(&form(1, 0, 1), 3).unwrap();
    assert_eq!((pr.chi_n_star_at_p, pr.d_n_star, pr.l_n), (0, 12, 0));
    let pr = chi_n_star_data(&form(1, 0, 3), 3).unwrap();
    assert_eq!((pr.chi_n_star_at_p, pr.d_n_star, pr.l_n), (1, 1, 1));
}

#[test]
fn profiles_consistent_on_corpus() {
    for p in [3, 7, 11] {
        for n in reduced_forms(200) {
            let pr = chi_n_star_data(&n, p).unwrap();
            let ord_d = eisfe::degree2::valuation(pr.d_n, p);
            assert_eq!(pr.d_n_star, if ord_d == 0 { p as i64 * pr.d_n } else { pr.d_n / p as i64 }, "{n}");
            assert!(verify_f_local_fe(&n, p).unwrap(), "{n} p={p}");
        }
    }
}

#[test]
fn local_factor_examples() {
    let lf = f_local_p(&form(1, 0, 3), 3).unwrap();
    assert_eq!(lf.f, RatFunc::monomial(scalar(3, (3, 1), 0, 1), 1));
    assert!(f_local_p(&form(1, 0, 1), 3).unwrap().f.is_zero());
    assert!(verify_f_local_fe(&form(2, 1, 2), 3).unwrap());
}

#[test]
fn oracle_frozen_series() {
    let kind = SeriesKind::Stratified { nu: 1, psi: CharacterKind::Quadratic };
    // (1,0,3): i·√3·(3X + 9X²)
    let st = stabilized_series(&form(1, 0, 3), 3, kind, DEFAULT_MAX_ENUM).unwrap();
    let z = QuadScalar::zero(3);
    let expected = poly(3, vec![z.clone(), scalar(3, (3, 1), 1, 1), scalar(3, (9, 1), 1, 1)]);
    assert_eq!(st.series, expected);
    // (1,1,7): i·√3·(3X + 54X³ + 243X⁴), reached only at depth 4
    let st = stabilized_series(&form(1, 1, 7), 3, kind, DEFAULT_MAX_ENUM).unwrap();
    let expected = poly(
        3,
        vec![z.clone(), scalar(3, (3, 1), 1, 1), z.clone(), scalar(3, (54, 1), 1, 1), scalar(3, (243, 1), 1, 1)],
    );
    assert_eq!(st.series, expected);
    assert_eq!(st.first_stable_depth, 4);
    assert_eq!(RatFunc::from_poly(st.series), f_local_p(&form(1, 1, 7), 3).unwrap().s_full);
    // (1,0,1): identically zero at every depth
    for d in 1..=3 {
        assert!(local_series_bruteforce(&form(1, 0, 1), 3, 1, CharacterKind::Quadratic, d, DEFAULT_MAX_ENUM)
            .unwrap()
            .is_zero());
    }
}

#[test]
fn f_q_frozen() {
    let cases = [((1, 0, 9), 3, vec![1, 3, 27]), ((3, 0, 3), 3, vec![1, 12, 27]), ((1, 0, 3), 2, vec![1, 2, 8])];
    for ((a, b, c), q, coeffs) in cases {
        let x = extract_f_q(&form(a, b, c), q, DEFAULT_MAX_ENUM).unwrap();
        assert_eq!(x.f_poly, Poly::from_ints(q, &coeffs), "({a},{b},{c}) q={q}: {}", x.f_poly);
        assert!(x.fe_ok);
    }
}

/// `Σ_{i≤e} (q²X)^i [Σ_{j≤f−i} (q³X²)^j − χ(q)qX Σ_{j<f−i} (q³X²)^j]`, `e` the
/// `q`-order of the content of `N` and `f` the `q`-order of the conductor.
fn classical_f(q: u64, e: u32, f: u32, chi: i64) -> Poly {
    let qi = q as i64;
    let mut c = vec![0i64; 2 * f as usize + 2];
    for i in 0..=e.min(f) {
        let shift = qi.pow(2 * i);
        for j in 0..=(f - i) {
            c[(i + 2 * j) as usize] += shift * qi.pow(3 * j);
            if j < f - i {
                c[(i + 2 * j + 1) as usize] -= shift * chi * qi * qi.pow(3 * j);
            }
        }
    }
    Poly::from_ints(q, &c)
}

#[test]
fn f_q_matches_classical_formula() {
    for n in reduced_forms(60) {
        let split = discriminant_split(&n);
        for q in [2u64, 3] {
            let f = eisfe::degree2::valuation(split.f, q);
            if f == 0 {
                continue;
            }
            let content = num_integer::gcd(num_integer::gcd(n.a, n.b), n.c);
            let e = eisfe::degree2::valuation(content, q);
            let x = extract_f_q(&n, q, DEFAULT_MAX_ENUM).unwrap();
            assert_eq!(x.f_poly, classical_f(q, e, f, x.chi_n_at_q as i64), "{n} q={q}");
        }
    }
}

fn to_complex(x: &QuadScalar) -> (f64, f64) {
    let f = |r: &num_rational::BigRational| r.to_f64().unwrap();
    let s = (x.prime() as f64).sqrt();
    (f(&x.a().re) + s * f(&x.b().re), f(&x.a().im) + s * f(&x.b().im))
}

/// Direct floating-point evaluation of the stratified sum, classifying each
/// `R = u/p^depth` through its Smith profile.
fn naive_series(n: &BinaryForm, p: u64, depth: u32) -> Vec<(f64, f64)> {
    let pe = p.pow(depth) as i64;
    let mut out = vec![(0.0, 0.0); 2 * depth as usize + 1];
    for u1 in 0..pe {
        for u2 in 0..pe {
            for u3 in 0..pe {
                let rm = vec![vec![rat(u1, pe), rat(u2, pe)], vec![rat(u2, pe), rat(u3, pe)]];
                let sp = smith_profile(&rm, p, CharacterKind::Quadratic);
                if sp.nu != 1 {
                    continue;
                }
                let ord = eisfe::degree2::valuation(sp.delta.to_i64().unwrap(), p) as usize;
                let tr = (n.a * u1 + n.b * u2 + n.c * u3).rem_euclid(pe) as f64 / pe as f64;
                let angle = 2.0 * std::f64::consts::PI * tr;
                let w = sp.psi_tilde as f64;
                out[ord].0 += w * angle.cos();
                out[ord].1 += w * angle.sin();
            }
        }
    }
    out
}

#[test]
fn exact_oracle_matches_naive_sum() {
    for (n, depth) in [(form(1, 0, 3), 3), (form(1, 0, 1), 2), (form(2, 1, 2), 3), (form(1, 1, 7), 4)] {
        let exact = local_series_bruteforce(&n, 3, 1, CharacterKind::Quadratic, depth, DEFAULT_MAX_ENUM).unwrap();
        let naive = naive_series(&n, 3, depth);
        for (i, (re, im)) in naive.iter().enumerate() {
            let (er, ei) = to_complex(&exact.coeff(i));
            assert!((re - er).abs() < 1e-6 && (im - ei).abs() < 1e-6, "{n} X^{i}: {re}+{im}i vs {er}+{ei}i");
        }
    }
}
