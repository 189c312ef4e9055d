//! Closed-form reference solutions for the sl3(R) model problem with the
//! skew-symmetric / upper-triangular splitting.
//!
//! Starting from `a = E_31` and `b = E_32`, the coupled system
//! `da/ds = [a_+, a]`, `db/ds = [a_+, b]` and its second-time extension
//! `d(.)/dt = [b(s,t)_+, .]` have rational / square-root closed forms, with
//! the group-valued solutions `sigma(s)` and `tau(s,t)` produced by the
//! dressing construction `c(s,t) = tau sigma c sigma^-1 tau^-1`. These
//! functions are transcribed verbatim; the residual tests below check each
//! one against the differential equation it is supposed to satisfy, so a
//! transcription slip fails loudly.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::liealg::{AlgebraTag, GroupElement, GroupTag, LieElement};

fn sl3(entries: [[f64; 3]; 3]) -> LieElement {
    let mat = DMatrix::from_fn(3, 3, |i, j| entries[i][j]);
    LieElement::new(mat, AlgebraTag::SpecialLinear).expect("closed form lies in sl3")
}

fn sl3_group(entries: [[f64; 3]; 3]) -> GroupElement {
    let mat = DMatrix::from_fn(3, 3, |i, j| entries[i][j]);
    GroupElement::new(mat, GroupTag::SpecialLinear).expect("closed form lies in SL3")
}

/// Initial condition `a = E_31`.
pub fn initial_a() -> LieElement {
    LieElement::elementary(3, 3, 1, AlgebraTag::SpecialLinear).expect("E_31")
}

/// Initial condition `b = E_32`.
pub fn initial_b() -> LieElement {
    LieElement::elementary(3, 3, 2, AlgebraTag::SpecialLinear).expect("E_32")
}

/// Solution of `da/ds = [a_+, a]`, `a(0) = E_31`.
pub fn closed_form_a(s: f64) -> LieElement {
    let q = 1.0 + s * s;
    sl3([
        [-s / q, 0.0, -s * s / q],
        [0.0, 0.0, 0.0],
        [1.0 / q, 0.0, s / q],
    ])
}

/// Solution of `d sigma/ds sigma^-1 = a(s)_+`, `sigma(0) = I`.
pub fn closed_form_sigma(s: f64) -> GroupElement {
    let r = (1.0 + s * s).sqrt();
    let u = 1.0 / r;
    let v = s / r;
    sl3_group([[u, 0.0, -v], [0.0, 1.0, 0.0], [v, 0.0, u]])
}

/// Solution of `db/ds = [a(s)_+, b]`, `b(0) = E_32`; equals
/// `sigma(s) b sigma(s)^-1`.
pub fn closed_form_b(s: f64) -> LieElement {
    let r = (1.0 + s * s).sqrt();
    sl3([
        [0.0, -s / r, 0.0],
        [0.0, 0.0, 0.0],
        [0.0, 1.0 / r, 0.0],
    ])
}

/// Solution of `db/dt = [b(s,t)_+, b(s,t)]`, `b(s, 0) = b(s)`.
pub fn closed_form_b_st(s: f64, t: f64) -> LieElement {
    let q = 1.0 + s * s;
    let rq = q.sqrt();
    let d = 1.0 + s * s + t * t;
    let rd = d.sqrt();
    sl3([
        [0.0, -s / rd, -s * t / (rq * rd)],
        [0.0, -t / d, -t * t / (rq * d)],
        [0.0, rq / d, t / d],
    ])
}

/// Solution of `d tau/dt tau^-1 = b(s,t)_+`, `tau(s, 0) = sigma(s)`.
pub fn closed_form_tau(s: f64, t: f64) -> GroupElement {
    let rq = (1.0 + s * s).sqrt();
    let rd = (1.0 + s * s + t * t).sqrt();
    sl3_group([
        [1.0 / rq, 0.0, -s / rq],
        [-s * t / (rq * rd), rq / rd, -t / (rq * rd)],
        [s / rd, t / rd, 1.0 / rd],
    ])
}

/// Solution of `da/dt = [b(s,t)_+, a(s,t)]`, `a(s, 0) = a(s)`; equals
/// `tau(s,t) a(s) tau(s,t)^-1`.
pub fn closed_form_a_st(s: f64, t: f64) -> LieElement {
    let q = 1.0 + s * s;
    let rq = q.sqrt();
    let d = 1.0 + s * s + t * t;
    let rd = d.sqrt();
    sl3([
        [-s / q, s * s * t / (q * rd), -s * s / (rq * rd)],
        [-t / (q * rd), t * t * s / (d * q), -t * s / (d * rq)],
        [1.0 / (rq * rd), -t * s / (d * rq), s / d],
    ])
}

/// Joint flow of an arbitrary initial `c`.
///
/// The dressing composition is "conjugate by the s-dressing `sigma(s)`, then
/// by the t-dressing started from the identity". Since `tau(s, 0) = sigma(s)`
/// here, that t-dressing is `tau(s,t) sigma(s)^-1` and the composition
/// telescopes to a single conjugation by `tau(s,t)`:
/// `c(s,t) = tau(s,t) c tau(s,t)^-1`.
pub fn closed_form_c_st(s: f64, t: f64, c: &LieElement) -> Result<LieElement> {
    closed_form_tau(s, t).conjugate(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{conjugate, random_element, Splitting};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Central finite difference of a matrix-valued path.
    fn fd_path(f: impl Fn(f64) -> LieElement, x: f64, h: f64) -> LieElement {
        f(x + h).sub(&f(x - h)).unwrap().scale(0.5 / h)
    }

    #[test]
    fn initial_conditions() {
        assert!(closed_form_a(0.0).distance(&initial_a()) == 0.0);
        assert!(closed_form_b(0.0).distance(&initial_b()) == 0.0);
        assert!(closed_form_sigma(0.0)
            .matrix()
            .eq(&nalgebra::DMatrix::identity(3, 3)));
        for s in [0.0, 0.4, 1.7] {
            assert!(closed_form_tau(s, 0.0).distance(&closed_form_sigma(s)) <= 1e-15);
            assert!(closed_form_b_st(s, 0.0).distance(&closed_form_b(s)) <= 1e-15);
            assert!(closed_form_a_st(s, 0.0).distance(&closed_form_a(s)) <= 1e-15);
        }
    }

    #[test]
    fn a_at_one() {
        let expected = sl3([
            [-0.5, 0.0, -0.5],
            [0.0, 0.0, 0.0],
            [0.5, 0.0, 0.5],
        ]);
        assert!(closed_form_a(1.0).distance(&expected) <= 1e-15);
    }

    #[test]
    fn traces_and_determinants() {
        for &(s, t) in &[(0.0, 0.0), (0.7, 1.3), (1.9, 0.2), (1.5, 1.5)] {
            assert!(closed_form_a(s).trace().abs() <= 1e-15);
            assert!(closed_form_b_st(s, t).trace().abs() <= 1e-15);
            assert!(closed_form_a_st(s, t).trace().abs() <= 1e-15);
            assert!((closed_form_sigma(s).determinant() - 1.0).abs() <= 1e-12);
            assert!((closed_form_tau(s, t).determinant() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ode_residual_for_a() {
        let split = Splitting::skew_upper();
        for s in [0.1, 0.6, 1.2, 1.9] {
            let fd = fd_path(closed_form_a, s, 1e-4);
            let a = closed_form_a(s);
            let rhs = split.plus(&a).bracket(&a).unwrap();
            assert!(fd.distance(&rhs) <= 1e-6, "s = {s}");
        }
    }

    #[test]
    fn ode_residual_for_b_in_t() {
        let split = Splitting::skew_upper();
        for &(s, t) in &[(0.3, 0.2), (0.9, 1.1), (1.6, 0.7)] {
            let fd = fd_path(|t| closed_form_b_st(s, t), t, 1e-4);
            let b = closed_form_b_st(s, t);
            let rhs = split.plus(&b).bracket(&b).unwrap();
            assert!(fd.distance(&rhs) <= 1e-6, "(s, t) = ({s}, {t})");
        }
    }

    #[test]
    fn ode_residual_for_a_in_t() {
        let split = Splitting::skew_upper();
        for &(s, t) in &[(0.3, 0.2), (0.9, 1.1), (1.6, 0.7)] {
            let fd = fd_path(|t| closed_form_a_st(s, t), t, 1e-4);
            let rhs = split
                .plus(&closed_form_b_st(s, t))
                .bracket(&closed_form_a_st(s, t))
                .unwrap();
            assert!(fd.distance(&rhs) <= 1e-6, "(s, t) = ({s}, {t})");
        }
    }

    #[test]
    fn ode_residual_for_sigma_and_tau() {
        let split = Splitting::skew_upper();
        for s in [0.2, 0.8, 1.5] {
            // d sigma/ds sigma^-1 = a(s)_+.
            let fd = fd_path(
                |s| {
                    LieElement::new(
                        closed_form_sigma(s).matrix().clone(),
                        AlgebraTag::GeneralLinear,
                    )
                    .unwrap()
                },
                s,
                1e-4,
            );
            let inv = closed_form_sigma(s).matrix().clone().try_inverse().unwrap();
            let lhs = fd.matrix() * inv;
            let rhs = split.plus(&closed_form_a(s));
            assert!((lhs - rhs.matrix()).norm() <= 1e-6, "s = {s}");
        }
        for &(s, t) in &[(0.4, 0.3), (1.1, 0.9)] {
            // d tau/dt tau^-1 = b(s,t)_+.
            let fd = fd_path(
                |t| {
                    LieElement::new(
                        closed_form_tau(s, t).matrix().clone(),
                        AlgebraTag::GeneralLinear,
                    )
                    .unwrap()
                },
                t,
                1e-4,
            );
            let inv = closed_form_tau(s, t).matrix().clone().try_inverse().unwrap();
            let lhs = fd.matrix() * inv;
            let rhs = split.plus(&closed_form_b_st(s, t));
            assert!((lhs - rhs.matrix()).norm() <= 1e-6, "(s, t) = ({s}, {t})");
        }
    }

    #[test]
    fn consistency_web() {
        for &(s, t) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 1.3), (1.8, 0.4)] {
            // b(s) = sigma(s) b sigma(s)^-1, and likewise a(s).
            let via_sigma = conjugate(&closed_form_sigma(s), &initial_b()).unwrap();
            assert!(via_sigma.distance(&closed_form_b(s)) <= 1e-12);
            let via_sigma = conjugate(&closed_form_sigma(s), &initial_a()).unwrap();
            assert!(via_sigma.distance(&closed_form_a(s)) <= 1e-12);

            // tau conjugates the initial values all the way to (s, t); its
            // t = 0 slice sigma(s) already carries the s-flow.
            let via_tau = conjugate(&closed_form_tau(s, t), &initial_a()).unwrap();
            assert!(via_tau.distance(&closed_form_a_st(s, t)) <= 1e-12);
            let via_tau = conjugate(&closed_form_tau(s, t), &initial_b()).unwrap();
            assert!(via_tau.distance(&closed_form_b_st(s, t)) <= 1e-12);

            // The dressing composition ad(tau sigma^-1) after ad(sigma) is
            // the same map.
            let tilde = closed_form_tau(s, t).matrix()
                * closed_form_sigma(s).matrix().clone().try_inverse().unwrap();
            let tilde = crate::liealg::GroupElement::new(tilde, crate::liealg::GroupTag::SpecialLinear)
                .unwrap();
            let composed = conjugate(
                &tilde,
                &conjugate(&closed_form_sigma(s), &initial_a()).unwrap(),
            )
            .unwrap();
            assert!(composed.distance(&closed_form_a_st(s, t)) <= 1e-12);
        }
    }

    #[test]
    fn joint_flow_fixes_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let c = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        let base = crate::flows::char_poly_coeffs(&c);
        for &(s, t) in &[(0.5, 0.5), (1.0, 1.0), (1.5, 0.3)] {
            let moved = closed_form_c_st(s, t, &c).unwrap();
            let coeffs = crate::flows::char_poly_coeffs(&moved);
            for (a, b) in base.iter().zip(&coeffs) {
                assert!((a - b).abs() <= 1e-10, "(s, t) = ({s}, {t})");
            }
        }
    }
}
