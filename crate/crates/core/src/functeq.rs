//! Normalizing factors `γ_ν(ψ, s)`, the anti-diagonal matrix `T_ψ(s)` and the
//! functional-equation matrix `B_ψ(κ_n − s)^{−1} T_ψ(s) B_ψ(s)`.
//!
//! Archimedean completions are ν-independent and cancel in the matrix
//! identity, so only the `p`-local factors appear here. The variable is
//! `X = p^{−2s}` and `s ↦ κ_n − s` acts by `X ↦ p^{−(n+1)}/X`.

use serde::{Deserialize, Serialize};

use crate::exactscalar::QuadScalar;
use crate::fpforms::CharacterKind;
use crate::ratfunc::{RatFunc, RatFuncJson};
use crate::upoperator::{b_matrix, EisensteinContext, RFMatrix};

/// `γ_ν(ψ, s) = scalar · rational(X)`; the scalar is `s`-independent.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaFactor {
    pub nu: u32,
    pub scalar: QuadScalar,
    pub rational: RatFunc,
}

impl GammaFactor {
    pub fn value(&self) -> RatFunc {
        self.rational.scale(&self.scalar)
    }

    /// The same factor at `κ_n − s`.
    pub fn reflected(&self, n: u32) -> Self {
        GammaFactor { nu: self.nu, scalar: self.scalar.clone(), rational: self.rational.substitute_fe(n) }
    }
}

/// `∏_{i=1}^{[ν/2]} (1 − q^{2i}X²)/(1 − q^{2ν+1−2i}X²)`.
fn paired_product(q: u64, nu: u32) -> RatFunc {
    (1..=nu / 2).fold(RatFunc::one(q), |acc, i| {
        let num = RatFunc::one_minus(QuadScalar::p_power(q, 2 * i as i64), 2);
        let den = RatFunc::one_minus(QuadScalar::p_power(q, (2 * nu + 1 - 2 * i) as i64), 2);
        acc.mul(&num.div(&den).expect("nonzero"))
    })
}

/// `ε_p p^{−1/2}`.
pub fn eps_over_sqrt_p(p: u64) -> QuadScalar {
    &QuadScalar::epsilon(p) * &QuadScalar::sqrt_p(p).inv().expect("nonzero")
}

pub fn gamma_factor(ctx: &EisensteinContext, nu: u32) -> GammaFactor {
    assert!(nu <= ctx.n, "nu out of range");
    let p = ctx.p;
    let prod = paired_product(p, nu);
    match ctx.psi {
        CharacterKind::Trivial => {
            let lead = RatFunc::one_minus(QuadScalar::one(p), 1)
                .div(&RatFunc::one_minus(QuadScalar::p_power(p, nu as i64), 1))
                .expect("nonzero");
            GammaFactor { nu, scalar: QuadScalar::one(p), rational: lead.mul(&prod) }
        }
        CharacterKind::Quadratic => {
            let scalar = eps_over_sqrt_p(p).pow(nu as i64).expect("nonzero");
            GammaFactor { nu, scalar, rational: prod }
        }
    }
}

/// `γ_ν(ψ, s)·γ_{n−ν}(ψ, κ_n − s)^{−1}`, the `(n−ν, ν)` entry of `T_ψ(s)`.
pub fn eigen_fe_scalar(ctx: &EisensteinContext, nu: u32) -> RatFunc {
    let g = gamma_factor(ctx, nu);
    let h = gamma_factor(ctx, ctx.n - nu).reflected(ctx.n);
    let scalar = g.scalar.checked_div(&h.scalar).expect("nonzero scalar");
    g.rational.div(&h.rational).expect("nonzero gamma factor").scale(&scalar)
}

pub fn t_matrix(ctx: &EisensteinContext) -> RFMatrix {
    let n = ctx.n as usize;
    RFMatrix::from_fn(
        ctx.p,
        n + 1,
        |i, j| {
            if i + j == n {
                eigen_fe_scalar(ctx, j as u32)
            } else {
                RatFunc::zero(ctx.p)
            }
        },
    )
}

/// Entrywise `s ↦ κ_n − s`.
pub fn reflect_matrix(m: &RFMatrix, n: u32) -> RFMatrix {
    m.map(|f| f.substitute_fe(n))
}

/// `B_ψ(κ_n − s)^{−1}·T_ψ(s)·B_ψ(s)`.
pub fn fe_matrix(ctx: &EisensteinContext) -> RFMatrix {
    let b = b_matrix(ctx);
    fe_matrix_from(ctx, &b, &t_matrix(ctx))
}

/// The functional-equation matrix from precomputed `B` and `T`.
pub fn fe_matrix_from(ctx: &EisensteinContext, b: &RFMatrix, t: &RFMatrix) -> RFMatrix {
    let b_reflected_inv = reflect_matrix(b, ctx.n).unit_upper_inverse();
    b_reflected_inv.mul(&t.mul(b))
}

/// `FE(κ_n − s)·FE(s) = I`.
pub fn check_involution(ctx: &EisensteinContext, fe: &RFMatrix) -> bool {
    reflect_matrix(fe, ctx.n).mul(fe).is_identity()
}

/// `T(κ_n − s)·T(s) = I`.
pub fn check_t_involution(ctx: &EisensteinContext, t: &RFMatrix) -> bool {
    reflect_matrix(t, ctx.n).mul(t).is_identity()
}

/// `S_ν(ψ, 0, 2s)_q` for `q ≠ p`, in `X_q = q^{−2s}`.
pub fn local_siegel_unramified(nu: u32, psi_at_q: i8, q: u64) -> RatFunc {
    let psi = QuadScalar::from_int(q, psi_at_q as i64);
    let lead = RatFunc::one_minus(psi.clone(), 1)
        .div(&RatFunc::one_minus(&psi * &QuadScalar::p_power(q, nu as i64), 1))
        .expect("nonzero");
    lead.mul(&paired_product(q, nu))
}

/// True when every entry is `unit·f` with `f ∈ Q(X)`.
pub fn entries_in_line(m: &RFMatrix, unit: &QuadScalar) -> bool {
    let inv = unit.inv().expect("nonzero unit");
    m.entries().all(|(_, _, e)| e.scale(&inv).is_rational_over_q())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeMatrixJson {
    pub context: EisensteinContext,
    #[serde(rename = "T")]
    pub t: Vec<Vec<RatFuncJson>>,
    #[serde(rename = "FE")]
    pub fe: Vec<Vec<RatFuncJson>>,
    pub involution_ok: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratfunc::Poly;

    fn ctx(p: u64, n: u32, psi: CharacterKind) -> EisensteinContext {
        EisensteinContext::new(p, n, EisensteinContext::minimal_weight(p, psi), psi).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let t = ctx(3, 2, CharacterKind::Trivial);
        let q = ctx(3, 2, CharacterKind::Quadratic);
        assert!(gamma_factor(&t, 0).value().is_one());
        assert!(gamma_factor(&q, 0).value().is_one());
        let g1 = gamma_factor(&t, 1).value();
        assert_eq!(g1, RatFunc::new(Poly::from_ints(3, &[1, -1]), Poly::from_ints(3, &[1, -3])).unwrap());
        let h1 = gamma_factor(&q, 1).value();
        let i_over_root3 = &QuadScalar::i_unit(3) * &QuadScalar::sqrt_p(3).inv().unwrap();
        assert_eq!(h1, RatFunc::constant(i_over_root3));
    }

    #[test]
    fn t_matrix_n1_trivial() {
        let c = ctx(3, 1, CharacterKind::Trivial);
        let t = t_matrix(&c);
        assert!(t.is_anti_diagonal());
        let e10 = RatFunc::new(Poly::from_ints(3, &[3, -9]), Poly::from_ints(3, &[1, -9])).unwrap();
        let e01 = RatFunc::new(Poly::from_ints(3, &[1, -1]), Poly::from_ints(3, &[1, -3])).unwrap();
        assert_eq!(t.get(1, 0), &e10);
        assert_eq!(t.get(0, 1), &e01);
        assert!(check_t_involution(&c, &t));
    }

    #[test]
    fn fe_matrix_n1_trivial_by_hand() {
        let p = 3;
        let c = ctx(p, 1, CharacterKind::Trivial);
        let b01 = RatFunc::new(Poly::from_ints(p, &[0, -2]), Poly::from_ints(p, &[1, -3])).unwrap();
        let b01r = b01.substitute_fe(1);
        let t = t_matrix(&c);
        let (t01, t10) = (t.get(0, 1).clone(), t.get(1, 0).clone());
        // B(κ−s)^{-1} = [[1, −b01r],[0,1]], T = [[0,t01],[t10,0]], B = [[1,b01],[0,1]]
        let fe = fe_matrix(&c);
        assert_eq!(fe.get(0, 0), &b01r.mul(&t10).neg());
        assert_eq!(fe.get(0, 1), &t01.sub(&b01r.mul(&t10).mul(&b01)));
        assert_eq!(fe.get(1, 0), &t10);
        assert_eq!(fe.get(1, 1), &t10.mul(&b01));
        assert!(check_involution(&c, &fe));
    }

    #[test]
    fn quadratic_scalar_parity() {
        let c = ctx(3, 2, CharacterKind::Quadratic);
        let t = t_matrix(&c);
        assert!(t.get(1, 1).is_rational_over_q());
        let c1 = ctx(7, 1, CharacterKind::Quadratic);
        let v = eigen_fe_scalar(&c1, 0);
        assert!(!v.is_rational_over_q());
        assert!(entries_in_line(&t_matrix(&c1), &eps_over_sqrt_p(7)));
    }

    #[test]
    fn unramified_examples() {
        let q = 5;
        assert!(local_siegel_unramified(0, 1, q).is_one());
        let one = RatFunc::new(Poly::from_ints(q, &[1, -1]), Poly::from_ints(q, &[1, -5])).unwrap();
        assert_eq!(local_siegel_unramified(1, 1, q), one);
        let two = RatFunc::new(Poly::from_ints(q, &[1, 1]), Poly::from_ints(q, &[1, 25]))
            .unwrap()
            .mul(&RatFunc::new(Poly::from_ints(q, &[1, 0, -25]), Poly::from_ints(q, &[1, 0, -125])).unwrap());
        assert_eq!(local_siegel_unramified(2, -1, q), two);
    }

    #[test]
    fn product_rule() {
        let c = ctx(5, 3, CharacterKind::Quadratic);
        for nu in 0..=3 {
            let a = eigen_fe_scalar(&c, nu);
            let b = eigen_fe_scalar(&c, 3 - nu).substitute_fe(3);
            assert!(a.mul(&b).is_one());
        }
        let t = ctx(5, 3, CharacterKind::Trivial);
        assert_eq!(eigen_fe_scalar(&t, 3), gamma_factor(&t, 3).value());
    }
}
