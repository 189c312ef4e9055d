//! Expression functions `g^n -> g` with exact directional derivatives, and
//! the two Lie algebra structures on them.
//!
//! The pointwise bracket is `[f, g](x) = [f(x), g(x)]`. The primed bracket is
//!
//! ```text
//! [f, g]'(x) = dg_x([f(x), x]) - df_x([g(x), x]) + [g(x), f(x)]
//! ```
//!
//! where `[f(x), x]` is the tuple `([f(x), x_1], ..., [f(x), x_n])`. A nested
//! primed bracket needs directional derivatives of its operands, which are
//! themselves primed brackets, so the evaluation interface exposes mixed
//! directional derivatives of arbitrary order ([`SmoothMap::deriv_multi`]).
//! All derivatives are structural (product rule over subsets of the
//! directions), never finite differences; finite differences appear only in
//! tests as an independent oracle.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::freelie::LyndonTree;
use crate::liealg::{random_element, AlgebraTag, LieElement, Splitting};

/// A tuple direction in `g^n`.
pub type Direction = Vec<LieElement>;

/// Smooth map `g^n -> g` supporting exact mixed directional derivatives.
///
/// `deriv_multi(x, [v1, ..., vk], split)` is `D_{v1} ... D_{vk} f(x)`; with
/// an empty direction list it is the value `f(x)`. Directions are tuples in
/// `g^n`. Mixed partials commute for every implementation here, so the order
/// of the list does not matter.
pub trait SmoothMap: Send + Sync {
    fn arity(&self) -> usize;

    fn deriv_multi(
        &self,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement>;
}

/// Value of `f` at `x`.
pub fn eval(f: &dyn SmoothMap, x: &[LieElement], split: &Splitting) -> Result<LieElement> {
    check_lengths(f.arity(), x, &[])?;
    f.deriv_multi(x, &[], split)
}

/// First directional derivative `df_x(v)`.
pub fn dir_deriv(
    f: &dyn SmoothMap,
    x: &[LieElement],
    v: &[LieElement],
    split: &Splitting,
) -> Result<LieElement> {
    let dir: Direction = v.to_vec();
    check_lengths(f.arity(), x, std::slice::from_ref(&dir))?;
    f.deriv_multi(x, std::slice::from_ref(&dir), split)
}

fn check_lengths(arity: usize, x: &[LieElement], dirs: &[Direction]) -> Result<()> {
    if x.len() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            found: x.len(),
        });
    }
    for d in dirs {
        if d.len() != arity {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: d.len(),
            });
        }
    }
    Ok(())
}

/// Expression tree denoting a smooth map `g^n -> g`.
///
/// Node kinds: the i-th projection, composition with the splitting's plus
/// projector, the pointwise bracket of two subexpressions, linear
/// combinations, and constants. The arity is fixed at construction; `Proj`
/// indices are 1-based and must not exceed it.
#[derive(Debug, Clone)]
pub struct ExprFun {
    arity: usize,
    node: Node,
}

#[derive(Debug, Clone)]
enum Node {
    Proj(usize),
    Plus(Box<ExprFun>),
    Bracket(Box<ExprFun>, Box<ExprFun>),
    LinComb(Vec<(f64, ExprFun)>),
    Const(LieElement),
}

impl ExprFun {
    pub fn proj(index: usize, arity: usize) -> Result<Self> {
        if index == 0 || index > arity {
            return Err(Error::invalid(format!(
                "projection index {index} out of range for arity {arity}"
            )));
        }
        Ok(ExprFun {
            arity,
            node: Node::Proj(index),
        })
    }

    pub fn plus_part(child: ExprFun) -> Self {
        ExprFun {
            arity: child.arity,
            node: Node::Plus(Box::new(child)),
        }
    }

    pub fn bracket(left: ExprFun, right: ExprFun) -> Result<Self> {
        if left.arity != right.arity {
            return Err(Error::ArityMismatch {
                expected: left.arity,
                found: right.arity,
            });
        }
        Ok(ExprFun {
            arity: left.arity,
            node: Node::Bracket(Box::new(left), Box::new(right)),
        })
    }

    pub fn lin_comb(terms: Vec<(f64, ExprFun)>) -> Result<Self> {
        let arity = match terms.first() {
            Some((_, t)) => t.arity,
            None => return Err(Error::invalid("linear combination must be non-empty")),
        };
        if terms.iter().any(|(c, t)| t.arity != arity || !c.is_finite()) {
            return Err(Error::invalid(
                "linear combination terms must share arity and have finite coefficients",
            ));
        }
        Ok(ExprFun {
            arity,
            node: Node::LinComb(terms),
        })
    }

    pub fn const_elem(value: LieElement, arity: usize) -> Self {
        ExprFun {
            arity,
            node: Node::Const(value),
        }
    }

    /// Tagged JSON form, wrapped with the arity:
    /// `{"arity": 2, "expr": {"kind": "plus", "child": {"kind": "proj", "index": 1}}}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "arity": self.arity, "expr": self.node_json() })
    }

    fn node_json(&self) -> serde_json::Value {
        match &self.node {
            Node::Proj(i) => serde_json::json!({ "kind": "proj", "index": i }),
            Node::Plus(c) => serde_json::json!({ "kind": "plus", "child": c.node_json() }),
            Node::Bracket(l, r) => serde_json::json!({
                "kind": "bracket", "left": l.node_json(), "right": r.node_json()
            }),
            Node::LinComb(terms) => serde_json::json!({
                "kind": "lincomb",
                "terms": terms
                    .iter()
                    .map(|(c, t)| serde_json::json!({ "coeff": c, "child": t.node_json() }))
                    .collect::<Vec<_>>(),
            }),
            Node::Const(v) => serde_json::json!({
                "kind": "const",
                "algebra": v.tag(),
                "matrix": v.to_rows(),
            }),
        }
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arity = v
            .get("arity")
            .and_then(|a| a.as_u64())
            .ok_or_else(|| Error::invalid("missing 'arity'"))? as usize;
        let expr = v
            .get("expr")
            .ok_or_else(|| Error::invalid("missing 'expr'"))?;
        Self::node_from_json(expr, arity)
    }

    fn node_from_json(v: &serde_json::Value, arity: usize) -> Result<Self> {
        let kind = v
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| Error::invalid("expression node missing 'kind'"))?;
        match kind {
            "proj" => {
                let index = v
                    .get("index")
                    .and_then(|i| i.as_u64())
                    .ok_or_else(|| Error::invalid("proj node missing 'index'"))?;
                ExprFun::proj(index as usize, arity)
            }
            "plus" => {
                let child = v
                    .get("child")
                    .ok_or_else(|| Error::invalid("plus node missing 'child'"))?;
                Ok(ExprFun::plus_part(Self::node_from_json(child, arity)?))
            }
            "bracket" => {
                let l = v
                    .get("left")
                    .ok_or_else(|| Error::invalid("bracket node missing 'left'"))?;
                let r = v
                    .get("right")
                    .ok_or_else(|| Error::invalid("bracket node missing 'right'"))?;
                ExprFun::bracket(
                    Self::node_from_json(l, arity)?,
                    Self::node_from_json(r, arity)?,
                )
            }
            "lincomb" => {
                let terms = v
                    .get("terms")
                    .and_then(|t| t.as_array())
                    .ok_or_else(|| Error::invalid("lincomb node missing 'terms'"))?;
                let mut parsed = Vec::with_capacity(terms.len());
                for term in terms {
                    let coeff = term
                        .get("coeff")
                        .and_then(|c| c.as_f64())
                        .ok_or_else(|| Error::invalid("lincomb term missing 'coeff'"))?;
                    let child = term
                        .get("child")
                        .ok_or_else(|| Error::invalid("lincomb term missing 'child'"))?;
                    parsed.push((coeff, Self::node_from_json(child, arity)?));
                }
                ExprFun::lin_comb(parsed)
            }
            "const" => {
                let tag: AlgebraTag = serde_json::from_value(
                    v.get("algebra")
                        .cloned()
                        .unwrap_or(serde_json::json!("sl")),
                )
                .map_err(|e| Error::Serialization(e.to_string()))?;
                let rows: Vec<Vec<f64>> = serde_json::from_value(
                    v.get("matrix")
                        .cloned()
                        .ok_or_else(|| Error::invalid("const node missing 'matrix'"))?,
                )
                .map_err(|e| Error::Serialization(e.to_string()))?;
                Ok(ExprFun::const_elem(LieElement::from_rows(&rows, tag)?, arity))
            }
            other => Err(Error::invalid(format!("unknown expression kind '{other}'"))),
        }
    }
}

fn zero_like(proto: &LieElement) -> LieElement {
    LieElement::zero(proto.dim(), proto.tag())
}

fn acc_add(acc: &mut Option<LieElement>, term: LieElement) -> Result<()> {
    *acc = Some(match acc.take() {
        None => term,
        Some(a) => a.add(&term)?,
    });
    Ok(())
}

/// Split a direction list by bitmask into (selected, rest).
fn partition(dirs: &[Direction], mask: u32) -> (Vec<Direction>, Vec<Direction>) {
    let mut sel = Vec::new();
    let mut rest = Vec::new();
    for (j, d) in dirs.iter().enumerate() {
        if mask & (1 << j) != 0 {
            sel.push(d.clone());
        } else {
            rest.push(d.clone());
        }
    }
    (sel, rest)
}

/// Product rule over subsets for a pointwise bracket of two smooth maps:
/// `D_{v1..vk} [f, g] = sum over S of [D_S f, D_{S^c} g]`.
fn leibniz_bracket(
    f: &dyn SmoothMap,
    g: &dyn SmoothMap,
    x: &[LieElement],
    dirs: &[Direction],
    split: &Splitting,
) -> Result<LieElement> {
    let k = dirs.len() as u32;
    let mut acc = None;
    for mask in 0..(1u32 << k) {
        let (sel, rest) = partition(dirs, mask);
        let left = f.deriv_multi(x, &sel, split)?;
        let right = g.deriv_multi(x, &rest, split)?;
        acc_add(&mut acc, left.bracket(&right)?)?;
    }
    Ok(acc.expect("at least the empty subset"))
}

impl SmoothMap for ExprFun {
    fn arity(&self) -> usize {
        self.arity
    }

    fn deriv_multi(
        &self,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement> {
        check_lengths(self.arity, x, dirs)?;
        match &self.node {
            Node::Proj(i) => match dirs.len() {
                0 => Ok(x[i - 1].clone()),
                1 => Ok(dirs[0][i - 1].clone()),
                _ => Ok(zero_like(&x[i - 1])),
            },
            Node::Const(c) => {
                if dirs.is_empty() {
                    Ok(c.clone())
                } else {
                    Ok(zero_like(c))
                }
            }
            Node::Plus(child) => Ok(split.plus(&child.deriv_multi(x, dirs, split)?)),
            Node::LinComb(terms) => {
                let mut acc = None;
                for (c, t) in terms {
                    acc_add(&mut acc, t.deriv_multi(x, dirs, split)?.scale(*c))?;
                }
                Ok(acc.expect("non-empty by construction"))
            }
            Node::Bracket(l, r) => leibniz_bracket(&**l, &**r, x, dirs, split),
        }
    }
}

/// Pointwise bracket `[f, g](x) = [f(x), g(x)]` of two opaque smooth maps.
pub struct PointwiseBracket {
    left: Arc<dyn SmoothMap>,
    right: Arc<dyn SmoothMap>,
}

impl PointwiseBracket {
    pub fn new(left: Arc<dyn SmoothMap>, right: Arc<dyn SmoothMap>) -> Result<Self> {
        if left.arity() != right.arity() {
            return Err(Error::ArityMismatch {
                expected: left.arity(),
                found: right.arity(),
            });
        }
        Ok(PointwiseBracket { left, right })
    }
}

impl SmoothMap for PointwiseBracket {
    fn arity(&self) -> usize {
        self.left.arity()
    }

    fn deriv_multi(
        &self,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement> {
        check_lengths(self.arity(), x, dirs)?;
        leibniz_bracket(&*self.left, &*self.right, x, dirs, split)
    }
}

/// The primed bracket `[f, g]'` as a smooth map.
///
/// Value: `dg_x(w_f(x)) - df_x(w_g(x)) + [g(x), f(x)]` with
/// `w_f(x) = ([f(x), x_1], ..., [f(x), x_n])`.
///
/// Derivatives distribute over the three terms. For the first term, each
/// direction either moves the base point of `dg` or differentiates the tuple
/// `w_f`; summing over the subset `T` of directions sent into `w_f`:
///
/// ```text
/// D_{v1..vk} [x -> dg_x(w_f(x))] = sum over T of g.deriv_multi(x, T^c ++ [D_T w_f(x)])
/// ```
///
/// and the tuple derivative expands by the product rule,
/// `D_T w_f(x)_i = [D_T f(x), x_i] + sum_{j in T} [D_{T \ {j}} f(x), v_j[i]]`
/// (two or more directions on the linear slot `x_i` give zero).
pub struct PrimedBracket {
    f: Arc<dyn SmoothMap>,
    g: Arc<dyn SmoothMap>,
}

impl PrimedBracket {
    pub fn new(f: Arc<dyn SmoothMap>, g: Arc<dyn SmoothMap>) -> Result<Self> {
        if f.arity() != g.arity() {
            return Err(Error::ArityMismatch {
                expected: f.arity(),
                found: g.arity(),
            });
        }
        Ok(PrimedBracket { f, g })
    }

    /// `sum over T of u.deriv_multi(x, T^c ++ [D_T w_c(x)])` where
    /// `w_c(x) = [c(x), x]`: the derivative of `x -> du_x(w_c(x))`.
    fn lax_direction_term(
        u: &dyn SmoothMap,
        c: &dyn SmoothMap,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement> {
        let k = dirs.len() as u32;
        let n = x.len();
        let mut acc = None;
        for mask in 0..(1u32 << k) {
            let (sel, rest) = partition(dirs, mask);
            let c_full = c.deriv_multi(x, &sel, split)?;
            let mut w: Direction = Vec::with_capacity(n);
            for i in 0..n {
                let mut comp = c_full.bracket(&x[i])?;
                for (j, d) in sel.iter().enumerate() {
                    let mut sub = sel.clone();
                    sub.remove(j);
                    let c_sub = c.deriv_multi(x, &sub, split)?;
                    comp = comp.add(&c_sub.bracket(&d[i])?)?;
                }
                w.push(comp);
            }
            let mut all_dirs = rest;
            all_dirs.push(w);
            acc_add(&mut acc, u.deriv_multi(x, &all_dirs, split)?)?;
        }
        Ok(acc.expect("at least the empty subset"))
    }
}

impl SmoothMap for PrimedBracket {
    fn arity(&self) -> usize {
        self.f.arity()
    }

    fn deriv_multi(
        &self,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement> {
        check_lengths(self.arity(), x, dirs)?;
        let term_g = Self::lax_direction_term(&*self.g, &*self.f, x, dirs, split)?;
        let term_f = Self::lax_direction_term(&*self.f, &*self.g, x, dirs, split)?;
        let term_b = leibniz_bracket(&*self.g, &*self.f, x, dirs, split)?;
        term_g.sub(&term_f)?.add(&term_b)
    }
}

/// `f(x_{i_1}, ..., x_{i_k})` as a map of higher arity: precomposition with
/// a coordinate selection. Keeps derivatives exact, since the selection is
/// linear.
pub struct ArgSelect {
    inner: Arc<dyn SmoothMap>,
    indices: Vec<usize>,
    arity: usize,
}

impl ArgSelect {
    /// `indices` are 1-based positions in the outer tuple; their number must
    /// match the inner map's arity.
    pub fn new(inner: Arc<dyn SmoothMap>, indices: Vec<usize>, arity: usize) -> Result<Self> {
        if indices.len() != inner.arity() {
            return Err(Error::ArityMismatch {
                expected: inner.arity(),
                found: indices.len(),
            });
        }
        if indices.iter().any(|&i| i == 0 || i > arity) {
            return Err(Error::invalid(format!(
                "argument indices {indices:?} out of range for arity {arity}"
            )));
        }
        Ok(ArgSelect {
            inner,
            indices,
            arity,
        })
    }

    fn select(&self, tuple: &[LieElement]) -> Vec<LieElement> {
        self.indices.iter().map(|&i| tuple[i - 1].clone()).collect()
    }
}

impl SmoothMap for ArgSelect {
    fn arity(&self) -> usize {
        self.arity
    }

    fn deriv_multi(
        &self,
        x: &[LieElement],
        dirs: &[Direction],
        split: &Splitting,
    ) -> Result<LieElement> {
        check_lengths(self.arity, x, dirs)?;
        let inner_x = self.select(x);
        let inner_dirs: Vec<Direction> = dirs.iter().map(|d| self.select(d)).collect();
        self.inner.deriv_multi(&inner_x, &inner_dirs, split)
    }
}

/// Which of the two Lie algebra structures on functions to use when
/// evaluating a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnAlgebra {
    Pointwise,
    Primed,
}

/// Pointwise bracket of two expressions, as an expression.
pub fn pointwise_bracket(f: &ExprFun, g: &ExprFun) -> Result<ExprFun> {
    ExprFun::bracket(f.clone(), g.clone())
}

/// Primed bracket of two smooth maps, as an opaque smooth map.
pub fn primed_bracket(f: Arc<dyn SmoothMap>, g: Arc<dyn SmoothMap>) -> Result<Arc<dyn SmoothMap>> {
    Ok(Arc::new(PrimedBracket::new(f, g)?))
}

/// Evaluate a word in the function algebra over the given generators, using
/// the pointwise or the primed bracket at every node.
pub fn word_in_algebra(
    tree: &LyndonTree,
    generators: &[Arc<dyn SmoothMap>],
    mode: FnAlgebra,
) -> Result<Arc<dyn SmoothMap>> {
    if tree.max_letter() > generators.len() {
        return Err(Error::ArityMismatch {
            expected: tree.max_letter(),
            found: generators.len(),
        });
    }
    match tree.children() {
        None => Ok(generators[tree.word()[0] - 1].clone()),
        Some((l, r)) => {
            let left = word_in_algebra(l, generators, mode)?;
            let right = word_in_algebra(r, generators, mode)?;
            match mode {
                FnAlgebra::Pointwise => Ok(Arc::new(PointwiseBracket::new(left, right)?)),
                FnAlgebra::Primed => Ok(Arc::new(PrimedBracket::new(left, right)?)),
            }
        }
    }
}

/// Fold a right-nested monomial `[g_{w1}, [g_{w2}, [...]]]` in the chosen
/// algebra.
pub fn right_nested_in_algebra(
    word: &[usize],
    generators: &[Arc<dyn SmoothMap>],
    mode: FnAlgebra,
) -> Result<Arc<dyn SmoothMap>> {
    if word.is_empty() {
        return Err(Error::invalid("empty word"));
    }
    let pick = |l: usize| -> Result<Arc<dyn SmoothMap>> {
        if l == 0 || l > generators.len() {
            return Err(Error::ArityMismatch {
                expected: l,
                found: generators.len(),
            });
        }
        Ok(generators[l - 1].clone())
    };
    let mut acc = pick(word[word.len() - 1])?;
    for &letter in word[..word.len() - 1].iter().rev() {
        let left = pick(letter)?;
        acc = match mode {
            FnAlgebra::Pointwise => Arc::new(PointwiseBracket::new(left, acc)?),
            FnAlgebra::Primed => Arc::new(PrimedBracket::new(left, acc)?),
        };
    }
    Ok(acc)
}

/// The projections `p_1, ..., p_n` as generators.
pub fn projection_generators(arity: usize) -> Vec<Arc<dyn SmoothMap>> {
    (1..=arity)
        .map(|i| Arc::new(ExprFun::proj(i, arity).expect("index in range")) as Arc<dyn SmoothMap>)
        .collect()
}

/// The projected generators `p_1+, ..., p_n+`.
pub fn plus_projection_generators(arity: usize) -> Vec<Arc<dyn SmoothMap>> {
    (1..=arity)
        .map(|i| {
            Arc::new(ExprFun::plus_part(
                ExprFun::proj(i, arity).expect("index in range"),
            )) as Arc<dyn SmoothMap>
        })
        .collect()
}

/// Residual `|| w(p_1,...,p_n)_+ (x) - w(p_1+,...,p_n+)' (x) ||` of the word
/// identity at a point.
///
/// The left side goes through plain matrix evaluation of the word followed by
/// the plus projector; the right side goes through the primed-bracket
/// machinery. The two computation paths share nothing but the splitting.
pub fn word_identity_residual(
    tree: &LyndonTree,
    x: &[LieElement],
    split: &Splitting,
) -> Result<f64> {
    let ctx = crate::freelie::BracketContext::matrix();
    let pointwise = crate::freelie::evaluate(tree, x, &ctx)?;
    let lhs = split.plus(&pointwise);

    let generators = plus_projection_generators(x.len());
    let primed = word_in_algebra(tree, &generators, FnAlgebra::Primed)?;
    let rhs = eval(&*primed, x, split)?;

    Ok(lhs.distance(&rhs))
}

/// Same residual for a right-nested monomial over an arbitrary word.
pub fn right_nested_identity_residual(
    word: &[usize],
    x: &[LieElement],
    split: &Splitting,
) -> Result<f64> {
    let ctx = crate::freelie::BracketContext::matrix();
    let pointwise = crate::freelie::right_nested_monomial(word, x, &ctx)?;
    let lhs = split.plus(&pointwise);

    let generators = plus_projection_generators(x.len());
    let primed = right_nested_in_algebra(word, &generators, FnAlgebra::Primed)?;
    let rhs = eval(&*primed, x, split)?;

    Ok(lhs.distance(&rhs))
}

/// Random expression of the given arity with tree depth at most `max_depth`.
/// Leaves are projections (mostly) or constants; inner nodes are brackets,
/// plus-parts, and two-term linear combinations.
pub fn random_expr<R: Rng + ?Sized>(
    rng: &mut R,
    arity: usize,
    max_depth: usize,
    dim: usize,
    tag: AlgebraTag,
) -> ExprFun {
    if max_depth == 0 {
        return if arity > 0 && rng.gen_range(0..4) < 3 {
            ExprFun::proj(rng.gen_range(1..=arity), arity).expect("index in range")
        } else {
            ExprFun::const_elem(random_element(rng, dim, tag), arity)
        };
    }
    match rng.gen_range(0..8) {
        0 | 1 | 2 => {
            let l = random_expr(rng, arity, max_depth - 1, dim, tag);
            let r = random_expr(rng, arity, max_depth - 1, dim, tag);
            ExprFun::bracket(l, r).expect("equal arity")
        }
        3 | 4 => ExprFun::plus_part(random_expr(rng, arity, max_depth - 1, dim, tag)),
        5 | 6 => {
            let a = random_expr(rng, arity, max_depth - 1, dim, tag);
            let b = random_expr(rng, arity, max_depth - 1, dim, tag);
            ExprFun::lin_comb(vec![
                (rng.gen_range(-1.0..=1.0), a),
                (rng.gen_range(-1.0..=1.0), b),
            ])
            .expect("equal arity")
        }
        _ => random_expr(rng, arity, 0, dim, tag),
    }
}

/// Random tuple in `g^arity`.
pub fn random_point<R: Rng + ?Sized>(
    rng: &mut R,
    arity: usize,
    dim: usize,
    tag: AlgebraTag,
) -> Vec<LieElement> {
    (0..arity).map(|_| random_element(rng, dim, tag)).collect()
}

/// Euclidean norm of a tuple.
pub fn tuple_norm(x: &[LieElement]) -> f64 {
    x.iter()
        .map(|e| e.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}
