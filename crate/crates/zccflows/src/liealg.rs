//! Matrix Lie algebra arithmetic, subalgebra splittings, and group elements.
//!
//! Elements are dense square real matrices tagged with the ambient algebra.
//! The default algebra is `sl_n` (trace zero); `gl_n` is available for
//! unconstrained matrices, including the 1x1 case used to model scalar
//! examples. The splitting `g = g_+ ⊕ g_-` is represented by a pair of
//! complementary idempotent linear maps so that alternate (including
//! deliberately broken) splittings can be plugged in.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on |trace| for membership in `sl_n`.
pub const EPS_ALG: f64 = 1e-12;
/// Tolerance on |det - 1| for membership in `SL_n`.
pub const EPS_GRP: f64 = 1e-9;

/// Ambient matrix Lie algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AlgebraTag {
    /// `sl_n`: trace-zero matrices.
    #[serde(rename = "sl")]
    SpecialLinear,
    /// `gl_n`: all matrices.
    #[serde(rename = "gl")]
    GeneralLinear,
}

impl fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraTag::SpecialLinear => f.write_str("sl"),
            AlgebraTag::GeneralLinear => f.write_str("gl"),
        }
    }
}

/// Element of a matrix Lie algebra.
///
/// Construction validates finiteness of the entries and, for `sl_n`, that
/// |trace| <= [`EPS_ALG`]. Arithmetic between elements requires matching
/// dimension and tag.
#[derive(Debug, Clone, PartialEq)]
pub struct LieElement {
    mat: DMatrix<f64>,
    tag: AlgebraTag,
}

impl LieElement {
    pub fn new(mat: DMatrix<f64>, tag: AlgebraTag) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid(format!(
                "algebra element must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !mat.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("algebra element entries".into()));
        }
        if tag == AlgebraTag::SpecialLinear {
            let tr = mat.trace();
            if tr.abs() > EPS_ALG {
                return Err(Error::Invariant(format!(
                    "sl element has |trace| = {:e} > {:e}",
                    tr.abs(),
                    EPS_ALG
                )));
            }
        }
        Ok(LieElement { mat, tag })
    }

    /// Build from row-major nested arrays, the JSON literal form.
    pub fn from_rows(rows: &[Vec<f64>], tag: AlgebraTag) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix literal must be square and non-empty"));
        }
        let mat = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(mat, tag)
    }

    /// Row-major nested arrays, the JSON literal form.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.mat[(i, j)]).collect())
            .collect()
    }

    pub fn zero(n: usize, tag: AlgebraTag) -> Self {
        LieElement {
            mat: DMatrix::zeros(n, n),
            tag,
        }
    }

    /// Elementary matrix `E_ij` (1-based indices). Off-diagonal elementary
    /// matrices are trace free, so any tag is allowed there; `E_ii` requires
    /// the `gl` tag.
    pub fn elementary(n: usize, i: usize, j: usize, tag: AlgebraTag) -> Result<Self> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::invalid(format!("E_{i}{j} out of range for n = {n}")));
        }
        let mut mat = DMatrix::zeros(n, n);
        mat[(i - 1, j - 1)] = 1.0;
        Self::new(mat, tag)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.frobenius_norm() <= tol
    }

    pub fn transpose(&self) -> Self {
        LieElement {
            mat: self.mat.transpose(),
            tag: self.tag,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        LieElement {
            mat: &self.mat * c,
            tag: self.tag,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(LieElement {
            mat: &self.mat + &other.mat,
            tag: self.tag,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(LieElement {
            mat: &self.mat - &other.mat,
            tag: self.tag,
        })
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::TagMismatch {
                left: self.tag.to_string(),
                right: other.tag.to_string(),
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Commutator `[X, Y] = XY - YX`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mat = &self.mat * &other.mat - &other.mat * &self.mat;
        // A commutator is exactly trace free; roundoff keeps it well inside
        // EPS_ALG, so construction cannot fail on the trace check.
        LieElement::new(mat, self.tag)
    }

    /// Frobenius distance to another element.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    /// Nearest `sl_n` element: subtract `trace/n` from the diagonal.
    pub fn project_traceless(&self) -> Self {
        let n = self.dim();
        let shift = self.mat.trace() / n as f64;
        let mut mat = self.mat.clone();
        for i in 0..n {
            mat[(i, i)] -= shift;
        }
        LieElement {
            mat,
            tag: AlgebraTag::SpecialLinear,
        }
    }
}

/// Entry-wise uniform sample in [-1, 1], trace-projected for `sl`.
pub fn random_element<R: Rng + ?Sized>(rng: &mut R, n: usize, tag: AlgebraTag) -> LieElement {
    let mat = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    match tag {
        AlgebraTag::SpecialLinear => LieElement { mat, tag }.project_traceless(),
        AlgebraTag::GeneralLinear => LieElement { mat, tag },
    }
}

/// Standard basis of the algebra: all `E_ij` with `i != j` plus the diagonal
/// differences `E_ii - E_(i+1)(i+1)` for `sl_n`, or all `E_ij` for `gl_n`.
pub fn standard_basis(n: usize, tag: AlgebraTag) -> Vec<LieElement> {
    let mut basis = Vec::new();
    match tag {
        AlgebraTag::SpecialLinear => {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let mut mat = DMatrix::zeros(n, n);
                        mat[(i, j)] = 1.0;
                        basis.push(LieElement { mat, tag });
                    }
                }
            }
            for i in 0..n - 1 {
                let mut mat = DMatrix::zeros(n, n);
                mat[(i, i)] = 1.0;
                mat[(i + 1, i + 1)] = -1.0;
                basis.push(LieElement { mat, tag });
            }
        }
        AlgebraTag::GeneralLinear => {
            for i in 0..n {
                for j in 0..n {
                    let mut mat = DMatrix::zeros(n, n);
                    mat[(i, j)] = 1.0;
                    basis.push(LieElement { mat, tag });
                }
            }
        }
    }
    basis
}

/// True iff the bracket of `x` with every basis element stays within `tol`
/// in Frobenius norm.
pub fn is_central(x: &LieElement, basis: &[LieElement], tol: f64) -> Result<bool> {
    if basis.is_empty() {
        return Err(Error::EmptyBasis);
    }
    for e in basis {
        if x.bracket(e)?.frobenius_norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

type Projector = Arc<dyn Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync>;

/// Vector-space splitting `g = g_+ ⊕ g_-` as a pair of complementary
/// idempotent linear maps.
///
/// The constructors here supply the well-known cases; [`Splitting::validate`]
/// checks complementarity, idempotency, and bracket closure of both images on
/// the standard basis, which the deliberately broken splitting fails.
#[derive(Clone)]
pub struct Splitting {
    name: String,
    plus: Projector,
    minus: Projector,
}

impl fmt::Debug for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Splitting").field("name", &self.name).finish()
    }
}

impl Splitting {
    pub fn new(
        name: impl Into<String>,
        plus: impl Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        minus: impl Fn(&DMatrix<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        Splitting {
            name: name.into(),
            plus: Arc::new(plus),
            minus: Arc::new(minus),
        }
    }

    /// `g_+` = skew-symmetric matrices, `g_-` = upper triangular matrices.
    ///
    /// With `L` the strictly lower part of `X`: `X_+ = L - L^T` and
    /// `X_- = X - X_+`, which is upper triangular.
    pub fn skew_upper() -> Self {
        Splitting::new(
            "skew-upper",
            |m| {
                let n = m.nrows();
                DMatrix::from_fn(n, n, |i, j| {
                    if i > j {
                        m[(i, j)]
                    } else if i < j {
                        -m[(j, i)]
                    } else {
                        0.0
                    }
                })
            },
            |m| {
                let n = m.nrows();
                DMatrix::from_fn(n, n, |i, j| {
                    if i < j {
                        m[(i, j)] + m[(j, i)]
                    } else if i == j {
                        m[(i, j)]
                    } else {
                        0.0
                    }
                })
            },
        )
    }

    /// Degenerate splitting `g_+ = g`, `g_- = 0`. Both images are
    /// subalgebras, so every splitting-dependent identity holds trivially.
    pub fn identity_plus() -> Self {
        Splitting::new("identity", |m| m.clone(), |m| DMatrix::zeros(m.nrows(), m.ncols()))
    }

    /// Negative control: symmetric/skew decomposition. Complementary and
    /// idempotent, but the symmetric image is not closed under the bracket,
    /// so this is not a subalgebra splitting and `validate` rejects it.
    pub fn broken_symmetric() -> Self {
        Splitting::new(
            "broken-symmetric",
            |m| (m + m.transpose()) * 0.5,
            |m| (m - m.transpose()) * 0.5,
        )
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "skew-upper" => Ok(Self::skew_upper()),
            "identity" => Ok(Self::identity_plus()),
            "broken-symmetric" => Ok(Self::broken_symmetric()),
            other => Err(Error::invalid(format!("unknown splitting '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn plus(&self, x: &LieElement) -> LieElement {
        LieElement {
            mat: (self.plus)(x.matrix()),
            tag: x.tag(),
        }
    }

    pub fn minus(&self, x: &LieElement) -> LieElement {
        LieElement {
            mat: (self.minus)(x.matrix()),
            tag: x.tag(),
        }
    }

    /// `(X_+, X_-)`.
    pub fn split(&self, x: &LieElement) -> (LieElement, LieElement) {
        (self.plus(x), self.minus(x))
    }

    /// Check, on the standard basis of the algebra, that the two projectors
    /// are complementary idempotents (tol `1e-14`) and that both images are
    /// closed under the bracket (tol `1e-12`).
    pub fn validate(&self, n: usize, tag: AlgebraTag) -> Result<()> {
        let basis = standard_basis(n, tag);
        for e in &basis {
            let p = self.plus(e);
            let m = self.minus(e);
            let sum = p.add(&m)?;
            if sum.distance(e) > 1e-14 {
                return Err(Error::Invariant(format!(
                    "splitting '{}' projectors do not sum to identity (defect {:e})",
                    self.name,
                    sum.distance(e)
                )));
            }
            if self.plus(&p).distance(&p) > 1e-14 || self.minus(&m).distance(&m) > 1e-14 {
                return Err(Error::Invariant(format!(
                    "splitting '{}' projectors are not idempotent",
                    self.name
                )));
            }
        }
        for x in &basis {
            for y in &basis {
                let bp = self.plus(x).bracket(&self.plus(y))?;
                if self.minus(&bp).frobenius_norm() > 1e-12 {
                    return Err(Error::Invariant(format!(
                        "splitting '{}': plus image not closed under bracket",
                        self.name
                    )));
                }
                let bm = self.minus(x).bracket(&self.minus(y))?;
                if self.plus(&bm).frobenius_norm() > 1e-12 {
                    return Err(Error::Invariant(format!(
                        "splitting '{}': minus image not closed under bracket",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Skew/upper split of a single element under the standard splitting.
pub fn split_skew_upper(x: &LieElement) -> (LieElement, LieElement) {
    Splitting::skew_upper().split(x)
}

/// Matrix Lie group tag. Only `SL_n` carries an invariant here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum GroupTag {
    #[serde(rename = "SL")]
    SpecialLinear,
}

/// Element of `SL_n`: |det - 1| <= [`EPS_GRP`].
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<f64>,
    tag: GroupTag,
}

impl GroupElement {
    pub fn new(mat: DMatrix<f64>, tag: GroupTag) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid("group element must be square"));
        }
        if !mat.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("group element entries".into()));
        }
        let det = mat.determinant();
        if (det - 1.0).abs() > EPS_GRP {
            return Err(Error::Invariant(format!(
                "SL element has |det - 1| = {:e} > {:e}",
                (det - 1.0).abs(),
                EPS_GRP
            )));
        }
        Ok(GroupElement { mat, tag })
    }

    pub fn identity(n: usize) -> Self {
        GroupElement {
            mat: DMatrix::identity(n, n),
            tag: GroupTag::SpecialLinear,
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn determinant(&self) -> f64 {
        self.mat.determinant()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }

    /// Conjugation `g X g^{-1}` of an algebra element by this group element.
    pub fn conjugate(&self, x: &LieElement) -> Result<LieElement> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        let det = self.mat.determinant();
        let inv = self
            .mat
            .clone()
            .try_inverse()
            .ok_or(Error::SingularGroupElement { det })?;
        let mat = &self.mat * x.matrix() * inv;
        match x.tag() {
            // Conjugation preserves the trace; re-validate so drift is loud.
            AlgebraTag::SpecialLinear => LieElement::new(mat, x.tag()),
            AlgebraTag::GeneralLinear => Ok(LieElement {
                mat,
                tag: x.tag(),
            }),
        }
    }
}

/// Conjugation `g X g^{-1}`.
pub fn conjugate(g: &GroupElement, x: &LieElement) -> Result<LieElement> {
    g.conjugate(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize, j: usize) -> LieElement {
        LieElement::elementary(n, i, j, AlgebraTag::SpecialLinear).unwrap()
    }

    #[test]
    fn bracket_of_commuting_generators_is_zero() {
        // a = E_31, b = E_32 commute.
        let a = e(3, 3, 1);
        let b = e(3, 3, 2);
        let c = a.bracket(&b).unwrap();
        assert!(c.is_zero(0.0));
    }

    #[test]
    fn bracket_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        assert!(x.bracket(&x).unwrap().is_zero(0.0));
    }

    #[test]
    fn bracket_e12_e21_in_sl2() {
        let x = e(2, 1, 2);
        let y = e(2, 2, 1);
        let b = x.bracket(&y).unwrap();
        let expected =
            LieElement::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]], AlgebraTag::SpecialLinear)
                .unwrap();
        assert!(b.distance(&expected) == 0.0);
    }

    #[test]
    fn bracket_rejects_mismatched_dims() {
        let x = e(2, 1, 2);
        let y = e(3, 1, 2);
        assert!(matches!(
            x.bracket(&y),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sl_constructor_rejects_nonzero_trace() {
        let m = DMatrix::from_diagonal_element(3, 3, 1.0);
        assert!(LieElement::new(m, AlgebraTag::SpecialLinear).is_err());
    }

    #[test]
    fn constructor_rejects_non_finite() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(LieElement::new(m, AlgebraTag::GeneralLinear).is_err());
    }

    #[test]
    fn split_of_e31() {
        // E_31 -> (E_31 - E_13, E_13).
        let a = e(3, 3, 1);
        let (p, m) = split_skew_upper(&a);
        let expected_plus = a.sub(&e(3, 1, 3)).unwrap();
        let expected_minus = e(3, 1, 3);
        assert_eq!(p, expected_plus);
        assert_eq!(m, expected_minus);
    }

    #[test]
    fn split_fixes_skew_and_upper() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        let skew = x.sub(&x.transpose()).unwrap().scale(0.5);
        let (p, m) = split_skew_upper(&skew);
        assert!(p.distance(&skew) <= 1e-15);
        assert!(m.is_zero(1e-15));

        let upper = LieElement::from_rows(
            &[vec![1.0, 2.0, 3.0], vec![0.0, -4.0, 5.0], vec![0.0, 0.0, 3.0]],
            AlgebraTag::SpecialLinear,
        )
        .unwrap();
        let (p, m) = split_skew_upper(&upper);
        assert!(p.is_zero(0.0));
        assert!(m.distance(&upper) == 0.0);
    }

    #[test]
    fn split_roundtrip_is_exact() {
        // Recombining a skew part and an upper part splits back bit for bit.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let (p, m) = split_skew_upper(&x);
            let (p2, m2) = split_skew_upper(&p.add(&m).unwrap());
            assert_eq!(p, p2);
            assert_eq!(m, m2);
        }
    }

    #[test]
    fn standard_splittings_validate() {
        Splitting::skew_upper().validate(3, AlgebraTag::SpecialLinear).unwrap();
        Splitting::identity_plus().validate(3, AlgebraTag::SpecialLinear).unwrap();
        assert!(Splitting::broken_symmetric()
            .validate(3, AlgebraTag::SpecialLinear)
            .is_err());
    }

    #[test]
    fn centrality() {
        let basis = standard_basis(3, AlgebraTag::SpecialLinear);
        let zero = LieElement::zero(3, AlgebraTag::SpecialLinear);
        assert!(is_central(&zero, &basis, 1e-12).unwrap());
        assert!(!is_central(&e(3, 1, 2), &basis, 1e-12).unwrap());

        let gl_basis = standard_basis(3, AlgebraTag::GeneralLinear);
        let id = LieElement::new(DMatrix::identity(3, 3), AlgebraTag::GeneralLinear).unwrap();
        assert!(is_central(&id, &gl_basis, 1e-12).unwrap());

        assert!(matches!(is_central(&zero, &[], 1e-12), Err(Error::EmptyBasis)));
    }

    #[test]
    fn conjugate_by_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        let g = GroupElement::identity(3);
        assert!(g.conjugate(&x).unwrap().distance(&x) == 0.0);
    }

    #[test]
    fn conjugation_of_b_matches_closed_form_at_s1() {
        // sigma(1) = [[u,0,-v],[0,1,0],[v,0,u]] with u = v = 1/sqrt(2);
        // sigma(1) b sigma(1)^-1 = [[0,-1/sqrt2,0],[0,0,0],[0,1/sqrt2,0]].
        let r = 1.0 / 2.0_f64.sqrt();
        let sigma = GroupElement::new(
            DMatrix::from_row_slice(3, 3, &[r, 0.0, -r, 0.0, 1.0, 0.0, r, 0.0, r]),
            GroupTag::SpecialLinear,
        )
        .unwrap();
        let b = e(3, 3, 2);
        let got = sigma.conjugate(&b).unwrap();
        let expected = LieElement::from_rows(
            &[vec![0.0, -r, 0.0], vec![0.0, 0.0, 0.0], vec![0.0, r, 0.0]],
            AlgebraTag::SpecialLinear,
        )
        .unwrap();
        assert!(got.distance(&expected) <= 1e-14);
    }

    #[test]
    fn conjugation_is_a_bracket_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // A generic SL_3 element built by normalizing a random perturbation
        // of the identity.
        let mut m = DMatrix::identity(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += 0.3 * rng.gen_range(-1.0..=1.0);
            }
        }
        let det: f64 = m.determinant();
        m /= det.cbrt();
        let g = GroupElement::new(m, GroupTag::SpecialLinear).unwrap();

        let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        let y = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
        let lhs = g.conjugate(&x.bracket(&y).unwrap()).unwrap();
        let rhs = g
            .conjugate(&x)
            .unwrap()
            .bracket(&g.conjugate(&y).unwrap())
            .unwrap();
        assert!(lhs.distance(&rhs) <= 1e-12);
    }

    #[test]
    fn group_constructor_rejects_bad_determinant() {
        let m = DMatrix::identity(3, 3) * 1.5;
        assert!(GroupElement::new(m, GroupTag::SpecialLinear).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetry(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let y = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let sum = x.bracket(&y).unwrap().add(&y.bracket(&x).unwrap()).unwrap();
            let bound = 1e-14 * x.frobenius_norm() * y.frobenius_norm();
            prop_assert!(sum.frobenius_norm() <= bound.max(1e-30));
        }

        #[test]
        fn jacobi(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(10_000));
            let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let y = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let z = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let t1 = x.bracket(&y.bracket(&z).unwrap()).unwrap();
            let t2 = y.bracket(&z.bracket(&x).unwrap()).unwrap();
            let t3 = z.bracket(&x.bracket(&y).unwrap()).unwrap();
            let cyc = t1.add(&t2).unwrap().add(&t3).unwrap();
            let bound = 1e-12 * x.frobenius_norm() * y.frobenius_norm() * z.frobenius_norm();
            prop_assert!(cyc.frobenius_norm() <= bound.max(1e-30));
        }

        #[test]
        fn splitting_images_closed_under_bracket(seed in 0u64..100) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(20_000));
            let split = Splitting::skew_upper();
            let x = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);
            let y = random_element(&mut rng, 3, AlgebraTag::SpecialLinear);

            let bp = split.plus(&x).bracket(&split.plus(&y)).unwrap();
            prop_assert!(split.minus(&bp).frobenius_norm() <= 1e-13);

            let bm = split.minus(&x).bracket(&split.minus(&y)).unwrap();
            prop_assert!(split.plus(&bm).frobenius_norm() <= 1e-13);
        }
    }
}
