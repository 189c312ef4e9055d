//! Parametrized vector fields and their lifts.
//!
//! An order-`n` parametrized vector field assigns a tangent vector at the
//! last coordinate of a point of `g^(n+1)`; since `g` is a vector space,
//! tangent vectors are identified with algebra elements. The lift turns it
//! into a genuine vector field on `g^(n+1)` whose i-th component re-evaluates
//! the field with the last slot replaced by the i-th coordinate, so the
//! parameters flow too. Projection onto the last component is a left inverse
//! of the lift, and transporting the vector-field commutator through it
//! induces a bracket on parametrized vector fields, computed here by central
//! finite differences as an oracle for the analytic (primed-bracket) route.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exprfun::{self, ArgSelect, SmoothMap};
use crate::liealg::{LieElement, Splitting};

type FieldFn = Arc<dyn Fn(&[LieElement], &LieElement) -> Result<LieElement> + Send + Sync>;
type ComponentsFn = Arc<dyn Fn(&[LieElement]) -> Result<Vec<LieElement>> + Send + Sync>;

/// Coefficient data of a Lax-type field `(x, y) -> [f(x), y]`.
#[derive(Clone)]
pub struct LaxSource {
    pub coefficient: Arc<dyn SmoothMap>,
    pub splitting: Splitting,
}

/// Parametrized vector field of order `n`: a callable
/// `(params in g^n, point in g) -> g`.
#[derive(Clone)]
pub struct Pvf {
    order: usize,
    field: FieldFn,
    lax: Option<LaxSource>,
}

impl Pvf {
    pub fn new(
        order: usize,
        field: impl Fn(&[LieElement], &LieElement) -> Result<LieElement> + Send + Sync + 'static,
    ) -> Self {
        Pvf {
            order,
            field: Arc::new(field),
            lax: None,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The Lax coefficient and splitting, when this field was built by
    /// [`lax`] (possibly promoted).
    pub fn lax_source(&self) -> Option<&LaxSource> {
        self.lax.as_ref()
    }

    pub fn eval(&self, params: &[LieElement], point: &LieElement) -> Result<LieElement> {
        if params.len() != self.order {
            return Err(Error::ArityMismatch {
                expected: self.order,
                found: params.len(),
            });
        }
        (self.field)(params, point)
    }

    /// Evaluate on a packed state of length `order + 1`, last slot the point.
    pub fn eval_state(&self, state: &[LieElement]) -> Result<LieElement> {
        if state.len() != self.order + 1 {
            return Err(Error::ArityMismatch {
                expected: self.order + 1,
                found: state.len(),
            });
        }
        (self.field)(&state[..self.order], &state[self.order])
    }
}

/// Vector field on `g^(n+1)`.
///
/// Values produced by [`lift`] satisfy the defining property that component
/// `i` equals the underlying field evaluated with the last slot replaced by
/// the i-th coordinate. [`LiftedField::from_raw`] makes no such guarantee
/// and exists so that generic vector fields can be fed to [`project`] and to
/// the equivariance check.
#[derive(Clone)]
pub struct LiftedField {
    order: usize,
    components: ComponentsFn,
}

impl LiftedField {
    pub fn from_raw(
        order: usize,
        components: impl Fn(&[LieElement]) -> Result<Vec<LieElement>> + Send + Sync + 'static,
    ) -> Self {
        LiftedField {
            order,
            components: Arc::new(components),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of state components, `order + 1`.
    pub fn n_components(&self) -> usize {
        self.order + 1
    }

    pub fn eval(&self, state: &[LieElement]) -> Result<Vec<LieElement>> {
        if state.len() != self.n_components() {
            return Err(Error::ArityMismatch {
                expected: self.n_components(),
                found: state.len(),
            });
        }
        let out = (self.components)(state)?;
        debug_assert_eq!(out.len(), self.n_components());
        Ok(out)
    }
}

/// Lift a parametrized vector field to the product: at
/// `a = (a_1, ..., a_{n+1})`, component `i` is `xi(a_1, ..., a_n, a_i)`.
pub fn lift(xi: &Pvf) -> LiftedField {
    let xi = xi.clone();
    let order = xi.order();
    LiftedField::from_raw(order, move |state| {
        let params = &state[..order];
        state
            .iter()
            .map(|ai| xi.eval(params, ai))
            .collect::<Result<Vec<_>>>()
    })
}

/// Last component of a vector field on the product, as a parametrized
/// vector field. Left inverse of [`lift`].
pub fn project(eta: &LiftedField) -> Pvf {
    let eta = eta.clone();
    let order = eta.order();
    Pvf::new(order, move |params, point| {
        let mut state = params.to_vec();
        state.push(point.clone());
        let mut out = eta.eval(&state)?;
        Ok(out.pop().expect("n + 1 components"))
    })
}

/// Difference scheme for the numeric bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    /// Plain central difference, truncation O(h^2).
    Central,
    /// One Richardson extrapolation of central differences at steps h and
    /// h/2, truncation O(h^4).
    Richardson,
}

/// Bracket of two parametrized vector fields of equal order, computed
/// numerically: the commutator of the lifts, projected back.
///
/// Only the last component of the commutator survives projection, so this
/// evaluates `D_u psi(a) - D_w xi(a)` with `u` and `w` the lifted field
/// values at the packed state `a`, each directional derivative by a central
/// difference with the given step along the normalized direction.
pub fn pvf_bracket_numeric(xi: &Pvf, psi: &Pvf, fd_step: f64) -> Result<Pvf> {
    pvf_bracket_numeric_scheme(xi, psi, fd_step, FdScheme::Central)
}

/// [`pvf_bracket_numeric`] with an explicit difference scheme.
pub fn pvf_bracket_numeric_scheme(
    xi: &Pvf,
    psi: &Pvf,
    fd_step: f64,
    scheme: FdScheme,
) -> Result<Pvf> {
    if xi.order() != psi.order() {
        return Err(Error::ArityMismatch {
            expected: xi.order(),
            found: psi.order(),
        });
    }
    if !(fd_step > 0.0 && fd_step.is_finite()) {
        return Err(Error::invalid("fd_step must be positive and finite"));
    }
    let xi = xi.clone();
    let psi = psi.clone();
    let order = xi.order();
    Ok(Pvf::new(order, move |params, point| {
        let mut state = params.to_vec();
        state.push(point.clone());
        let u = lift_values(&xi, &state)?;
        let w = lift_values(&psi, &state)?;
        let d_psi = fd_scheme(&psi, &state, &u, fd_step, scheme)?;
        let d_xi = fd_scheme(&xi, &state, &w, fd_step, scheme)?;
        let out = d_psi.sub(&d_xi)?;
        if !out.matrix().iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("numeric pvf bracket".into()));
        }
        Ok(out)
    }))
}

fn fd_scheme(
    xi: &Pvf,
    state: &[LieElement],
    dir: &[LieElement],
    h: f64,
    scheme: FdScheme,
) -> Result<LieElement> {
    match scheme {
        FdScheme::Central => fd_directional(xi, state, dir, h),
        FdScheme::Richardson => {
            let coarse = fd_directional(xi, state, dir, h)?;
            let fine = fd_directional(xi, state, dir, h * 0.5)?;
            fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))
        }
    }
}

fn lift_values(xi: &Pvf, state: &[LieElement]) -> Result<Vec<LieElement>> {
    let params = &state[..xi.order()];
    state.iter().map(|ai| xi.eval(params, ai)).collect()
}

/// Central difference of `xi` (as a map on the packed state) along the tuple
/// direction `dir`, normalized for conditioning.
fn fd_directional(xi: &Pvf, state: &[LieElement], dir: &[LieElement], h: f64) -> Result<LieElement> {
    let norm = dir
        .iter()
        .map(|d| d.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        let proto = &state[state.len() - 1];
        return Ok(LieElement::zero(proto.dim(), proto.tag()));
    }
    let shifted = |sign: f64| -> Result<Vec<LieElement>> {
        state
            .iter()
            .zip(dir)
            .map(|(s, d)| s.add(&d.scale(sign * h / norm)))
            .collect()
    };
    let plus = xi.eval_state(&shifted(1.0)?)?;
    let minus = xi.eval_state(&shifted(-1.0)?)?;
    plus.sub(&minus).map(|d| d.scale(norm * 0.5 / h))
}

/// Lax-type field `(x, y) -> [f(x), y]`.
pub fn lax(f: Arc<dyn SmoothMap>, split: &Splitting) -> Pvf {
    let order = f.arity();
    let source = LaxSource {
        coefficient: f.clone(),
        splitting: split.clone(),
    };
    let split = split.clone();
    let mut pvf = Pvf::new(order, move |params, point| {
        exprfun::eval(&*f, params, &split)?.bracket(point)
    });
    pvf.lax = Some(source);
    pvf
}

/// Promote an order-1 field to order 2 by reading its parameter from the
/// given slot: slot 1 gives `(a, b, c) -> xi(a, c)`, slot 2 gives
/// `(a, b, c) -> xi(b, c)`.
pub fn promote(xi: &Pvf, slot: usize) -> Result<Pvf> {
    if xi.order() != 1 {
        return Err(Error::invalid(format!(
            "promote requires an order-1 field, got order {}",
            xi.order()
        )));
    }
    if slot != 1 && slot != 2 {
        return Err(Error::invalid("slot must be 1 or 2"));
    }
    let inner = xi.clone();
    let mut out = Pvf::new(2, move |params, point| {
        inner.eval(&params[slot - 1..slot], point)
    });
    // A promoted Lax field is still Lax, with the coefficient reading its
    // argument from the chosen slot.
    if let Some(src) = &xi.lax {
        out.lax = Some(LaxSource {
            coefficient: Arc::new(ArgSelect::new(src.coefficient.clone(), vec![slot], 2)?),
            splitting: src.splitting.clone(),
        });
    }
    Ok(out)
}

/// Max equivariance defect of a vector field on the product over the given
/// states: `|| tau_i(eta(a)) - eta(tau_i(a)) ||` over all `i`, where `tau_i`
/// replaces the last slot by the i-th coordinate. Zero (up to roundoff)
/// exactly when the field is a lift.
pub fn tau_equivariance_defect(eta: &LiftedField, states: &[Vec<LieElement>]) -> Result<f64> {
    let n1 = eta.n_components();
    let mut worst: f64 = 0.0;
    for state in states {
        let out = eta.eval(state)?;
        for i in 0..n1 {
            let mut tau_state = state.clone();
            tau_state[n1 - 1] = state[i].clone();
            let rhs = eta.eval(&tau_state)?;
            let mut tau_out = out.clone();
            tau_out[n1 - 1] = out[i].clone();
            let defect = tau_out
                .iter()
                .zip(&rhs)
                .map(|(x, y)| x.distance(y))
                .fold(0.0_f64, f64::max);
            worst = worst.max(defect);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprfun::{random_expr, random_point, ExprFun};
    use crate::liealg::{AlgebraTag, LieElement};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const SL3: AlgebraTag = AlgebraTag::SpecialLinear;
    const GL1: AlgebraTag = AlgebraTag::GeneralLinear;

    fn scalar(v: f64) -> LieElement {
        LieElement::from_rows(&[vec![v]], GL1).unwrap()
    }

    fn e31() -> LieElement {
        LieElement::elementary(3, 3, 1, SL3).unwrap()
    }

    /// The standard field `(x, y) -> [x_+, y]`.
    fn standard_field() -> Pvf {
        let f: Arc<dyn SmoothMap> = Arc::new(ExprFun::plus_part(ExprFun::proj(1, 1).unwrap()));
        lax(f, &Splitting::skew_upper())
    }

    #[test]
    fn lift_of_standard_field() {
        let split = Splitting::skew_upper();
        let xi = standard_field();
        let field = lift(&xi);
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let a = crate::liealg::random_element(&mut rng, 3, SL3);
        let y = crate::liealg::random_element(&mut rng, 3, SL3);
        let out = field.eval(&[a.clone(), y.clone()]).unwrap();
        let a_plus = split.plus(&a);
        assert!(out[0].distance(&a_plus.bracket(&a).unwrap()) == 0.0);
        assert!(out[1].distance(&a_plus.bracket(&y).unwrap()) == 0.0);
    }

    #[test]
    fn lift_of_constant_field() {
        let c = e31();
        let c2 = c.clone();
        let xi = Pvf::new(1, move |_, _| Ok(c2.clone()));
        let field = lift(&xi);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let state = random_point(&mut rng, 2, 3, SL3);
        let out = field.eval(&state).unwrap();
        assert!(out.iter().all(|o| o.distance(&c) == 0.0));
    }

    #[test]
    fn lift_on_scalars_matches_one_dimensional_formula() {
        // f(x, y) lifts to (f(x, x), f(x, y)).
        let xi = Pvf::new(1, |params, point| {
            let x = params[0].matrix()[(0, 0)];
            let y = point.matrix()[(0, 0)];
            Ok(scalar(x * x + 2.0 * y))
        });
        let field = lift(&xi);
        let out = field.eval(&[scalar(0.7), scalar(-0.3)]).unwrap();
        assert!((out[0].matrix()[(0, 0)] - (0.49 + 1.4)).abs() < 1e-15);
        assert!((out[1].matrix()[(0, 0)] - (0.49 - 0.6)).abs() < 1e-15);
    }

    #[test]
    fn project_after_lift_is_identity() {
        let xi = standard_field();
        let roundtrip = project(&lift(&xi));
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let a = crate::liealg::random_element(&mut rng, 3, SL3);
            let y = crate::liealg::random_element(&mut rng, 3, SL3);
            let direct = xi.eval(&[a.clone()], &y).unwrap();
            let via = roundtrip.eval(&[a], &y).unwrap();
            assert!(direct.distance(&via) == 0.0);
        }
    }

    #[test]
    fn lift_after_project_differs_for_generic_field() {
        // A generic field on g^2 whose first component ignores the lift
        // structure.
        let eta = LiftedField::from_raw(1, |state| {
            Ok(vec![state[1].scale(2.0), state[1].clone()])
        });
        let back = lift(&project(&eta));
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let state = random_point(&mut rng, 2, 3, SL3);
        let orig = eta.eval(&state).unwrap();
        let again = back.eval(&state).unwrap();
        // First components disagree: 2y vs value with last slot replaced.
        assert!(orig[0].distance(&again[0]) > 1e-6);
    }

    #[test]
    fn lift_after_project_restores_lifted_fields() {
        let xi = standard_field();
        let eta = lift(&xi);
        let back = lift(&project(&eta));
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..20 {
            let state = random_point(&mut rng, 2, 3, SL3);
            let a = eta.eval(&state).unwrap();
            let b = back.eval(&state).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!(x.distance(y) <= 1e-12);
            }
        }
    }

    #[test]
    fn equivariance_holds_for_lifts_and_fails_otherwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let states: Vec<Vec<LieElement>> =
            (0..50).map(|_| random_point(&mut rng, 2, 3, SL3)).collect();

        let xi = standard_field();
        let defect = tau_equivariance_defect(&lift(&xi), &states).unwrap();
        assert!(defect <= 1e-10, "lifted field defect {defect:e}");

        let eta = LiftedField::from_raw(1, |state| {
            Ok(vec![state[1].scale(2.0), state[1].clone()])
        });
        let defect = tau_equivariance_defect(&eta, &states).unwrap();
        assert!(defect > 1e-3, "generic field defect {defect:e}");
    }

    #[test]
    fn numeric_bracket_with_self_vanishes() {
        let xi = standard_field();
        let bracket = pvf_bracket_numeric(&xi, &xi, 1e-5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..10 {
            let a = crate::liealg::random_element(&mut rng, 3, SL3);
            let y = crate::liealg::random_element(&mut rng, 3, SL3);
            let out = bracket.eval(&[a], &y).unwrap();
            assert!(out.is_zero(1e-9), "norm {:e}", out.frobenius_norm());
        }
    }

    #[test]
    fn numeric_bracket_reproduces_scalar_example() {
        // f(x, y) = x^2, g(x, y) = y on the line: [f, g](x, y) = -x^2.
        let f = Pvf::new(1, |params, _| {
            let x = params[0].matrix()[(0, 0)];
            Ok(scalar(x * x))
        });
        let g = Pvf::new(1, |_, point| Ok(point.clone()));
        let bracket = pvf_bracket_numeric(&f, &g, 1e-5).unwrap();
        for &x in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            for &y in &[-0.8, 0.3, 1.1] {
                let got = bracket.eval(&[scalar(x)], &scalar(y)).unwrap();
                let expected = -x * x;
                assert!(
                    (got.matrix()[(0, 0)] - expected).abs() <= 1e-6,
                    "x = {x}, y = {y}, got {}",
                    got.matrix()[(0, 0)]
                );
            }
        }
    }

    #[test]
    fn numeric_bracket_order_mismatch() {
        let xi = standard_field();
        let psi = Pvf::new(2, |_, point| Ok(point.clone()));
        assert!(pvf_bracket_numeric(&xi, &psi, 1e-5).is_err());
        assert!(pvf_bracket_numeric(&xi, &xi, 0.0).is_err());
    }

    #[test]
    fn lax_field_of_constant_coefficient() {
        let split = Splitting::skew_upper();
        let c = e31();
        let f: Arc<dyn SmoothMap> = Arc::new(ExprFun::const_elem(c.clone(), 1));
        let xi = lax(f, &split);
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let x = crate::liealg::random_element(&mut rng, 3, SL3);
        let y = crate::liealg::random_element(&mut rng, 3, SL3);
        let out = xi.eval(&[x], &y).unwrap();
        assert!(out.distance(&c.bracket(&y).unwrap()) == 0.0);
        assert!(xi.lax_source().is_some());
    }

    #[test]
    fn lax_bracket_matches_primed_bracket() {
        // [xi_f, xi_g] = xi_{[f,g]'}: numeric vector-field commutator vs the
        // analytic primed-bracket route.
        let split = Splitting::skew_upper();
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        for _ in 0..5 {
            let f: Arc<dyn SmoothMap> = Arc::new(random_expr(&mut rng, 1, 2, 3, SL3));
            let g: Arc<dyn SmoothMap> = Arc::new(random_expr(&mut rng, 1, 2, 3, SL3));
            let xi_f = lax(f.clone(), &split);
            let xi_g = lax(g.clone(), &split);
            let numeric = pvf_bracket_numeric(&xi_f, &xi_g, 1e-5).unwrap();
            let analytic = lax(
                crate::exprfun::primed_bracket(f, g).unwrap(),
                &split,
            );
            for _ in 0..5 {
                let x = crate::liealg::random_element(&mut rng, 3, SL3);
                let y = crate::liealg::random_element(&mut rng, 3, SL3);
                let n = numeric.eval(&[x.clone()], &y).unwrap();
                let a = analytic.eval(&[x], &y).unwrap();
                assert!(
                    n.distance(&a) <= 1e-5,
                    "numeric vs analytic distance {:e}",
                    n.distance(&a)
                );
            }
        }
    }

    #[test]
    fn numeric_bracket_of_lax_fields_is_linear_in_the_point() {
        let split = Splitting::skew_upper();
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let f: Arc<dyn SmoothMap> = Arc::new(random_expr(&mut rng, 1, 2, 3, SL3));
        let g: Arc<dyn SmoothMap> = Arc::new(random_expr(&mut rng, 1, 2, 3, SL3));
        let bracket = pvf_bracket_numeric(&lax(f, &split), &lax(g, &split), 1e-5).unwrap();
        for _ in 0..5 {
            let x = [crate::liealg::random_element(&mut rng, 3, SL3)];
            let y1 = crate::liealg::random_element(&mut rng, 3, SL3);
            let y2 = crate::liealg::random_element(&mut rng, 3, SL3);
            let lam: f64 = rng.gen_range(-2.0..=2.0);

            let at = |y: &LieElement| bracket.eval(&x, y).unwrap();
            let additive = at(&y1.add(&y2).unwrap());
            let sum = at(&y1).add(&at(&y2)).unwrap();
            assert!(additive.distance(&sum) <= 1e-6);

            let homogeneous = at(&y1.scale(lam));
            let scaled = at(&y1).scale(lam);
            assert!(homogeneous.distance(&scaled) <= 1e-6);
        }
    }

    #[test]
    fn promote_standard_field() {
        let split = Splitting::skew_upper();
        let xi = standard_field();
        let xi1 = promote(&xi, 1).unwrap();
        let xi2 = promote(&xi, 2).unwrap();
        assert!(xi1.lax_source().is_some());

        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let a = crate::liealg::random_element(&mut rng, 3, SL3);
        let b = crate::liealg::random_element(&mut rng, 3, SL3);
        let y = crate::liealg::random_element(&mut rng, 3, SL3);

        let f1 = lift(&xi1);
        let out = f1.eval(&[a.clone(), b.clone(), y.clone()]).unwrap();
        let a_plus = split.plus(&a);
        assert!(out[0].distance(&a_plus.bracket(&a).unwrap()) == 0.0);
        assert!(out[1].distance(&a_plus.bracket(&b).unwrap()) == 0.0);
        assert!(out[2].distance(&a_plus.bracket(&y).unwrap()) == 0.0);

        let f2 = lift(&xi2);
        let out = f2.eval(&[a.clone(), b.clone(), y.clone()]).unwrap();
        let b_plus = split.plus(&b);
        assert!(out[0].distance(&b_plus.bracket(&a).unwrap()) == 0.0);
        assert!(out[1].distance(&b_plus.bracket(&b).unwrap()) == 0.0);
        assert!(out[2].distance(&b_plus.bracket(&y).unwrap()) == 0.0);

        // Diagonal symmetry.
        let d1 = xi1.eval(&[a.clone(), a.clone()], &y).unwrap();
        let d2 = xi2.eval(&[a.clone(), a.clone()], &y).unwrap();
        assert!(d1.distance(&d2) == 0.0);

        // Promoting a promoted (order-2) field is rejected.
        assert!(promote(&xi1, 1).is_err());
        assert!(promote(&xi, 3).is_err());
    }
}
