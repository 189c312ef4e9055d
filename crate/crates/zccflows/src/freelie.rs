//! Free Lie algebra combinatorics.
//!
//! Basis elements of the free Lie algebra on `n` letters are represented as
//! standard bracketings of Lyndon words. Degree >= 2 trees span the
//! commutator ideal. Evaluation of a tree in a concrete algebra is pluggable
//! through [`BracketContext`], so the same word can be evaluated with the
//! matrix commutator, the pointwise bracket on functions, or the primed
//! bracket.

use crate::error::{Error, Result};

/// Binary bracketing of a Lyndon word.
///
/// Leaves carry 1-based letter indices. Internal nodes split the word at its
/// standard factorization: the right factor is the longest proper Lyndon
/// suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LyndonTree {
    word: Vec<usize>,
    kind: TreeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TreeKind {
    Leaf(usize),
    Node(Box<LyndonTree>, Box<LyndonTree>),
}

impl LyndonTree {
    pub fn leaf(letter: usize) -> Self {
        LyndonTree {
            word: vec![letter],
            kind: TreeKind::Leaf(letter),
        }
    }

    /// The underlying letter sequence.
    pub fn word(&self) -> &[usize] {
        &self.word
    }

    /// Number of leaves.
    pub fn degree(&self) -> usize {
        self.word.len()
    }

    pub fn children(&self) -> Option<(&LyndonTree, &LyndonTree)> {
        match &self.kind {
            TreeKind::Leaf(_) => None,
            TreeKind::Node(l, r) => Some((l, r)),
        }
    }

    /// Largest letter index appearing in the word.
    pub fn max_letter(&self) -> usize {
        *self.word.iter().max().expect("non-empty word")
    }

    /// Word as a compact string, e.g. "112"; letters joined with dots when
    /// the alphabet has more than nine letters.
    pub fn word_string(&self) -> String {
        if self.max_letter() <= 9 {
            self.word.iter().map(|l| l.to_string()).collect()
        } else {
            self.word
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }

    /// Nested-list JSON: a leaf is the letter as a string, a node is a
    /// two-element array, e.g. `["1", ["1", "2"]]`.
    pub fn to_json(&self) -> serde_json::Value {
        match &self.kind {
            TreeKind::Leaf(l) => serde_json::Value::String(l.to_string()),
            TreeKind::Node(a, b) => serde_json::Value::Array(vec![a.to_json(), b.to_json()]),
        }
    }

    /// Parse the nested-list JSON form, checking that the result is a valid
    /// standard bracketing of a Lyndon word.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let tree = Self::from_json_unchecked(v)?;
        if !is_lyndon(&tree.word) {
            return Err(Error::invalid(format!(
                "word '{}' is not a Lyndon word",
                tree.word_string()
            )));
        }
        tree.check_standard_factorization()?;
        Ok(tree)
    }

    fn from_json_unchecked(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => {
                let letter: usize = s
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad letter '{s}'")))?;
                if letter == 0 {
                    return Err(Error::invalid("letters are 1-based"));
                }
                Ok(LyndonTree::leaf(letter))
            }
            serde_json::Value::Array(items) if items.len() == 2 => {
                let left = Self::from_json_unchecked(&items[0])?;
                let right = Self::from_json_unchecked(&items[1])?;
                let mut word = left.word.clone();
                word.extend_from_slice(&right.word);
                Ok(LyndonTree {
                    word,
                    kind: TreeKind::Node(Box::new(left), Box::new(right)),
                })
            }
            other => Err(Error::invalid(format!("bad tree node: {other}"))),
        }
    }

    fn check_standard_factorization(&self) -> Result<()> {
        if let TreeKind::Node(l, r) = &self.kind {
            let split = standard_factorization_split(&self.word);
            if l.word.len() != split {
                return Err(Error::invalid(format!(
                    "tree over '{}' does not use the standard factorization",
                    self.word_string()
                )));
            }
            l.check_standard_factorization()?;
            r.check_standard_factorization()?;
        }
        Ok(())
    }
}

/// True iff `w` is strictly smaller than all of its proper rotations.
pub fn is_lyndon(w: &[usize]) -> bool {
    let n = w.len();
    if n == 0 {
        return false;
    }
    for k in 1..n {
        let rotation = w[k..].iter().chain(w[..k].iter());
        if !(w.iter().lt(rotation)) {
            return false;
        }
    }
    true
}

/// Index of the standard factorization split of a Lyndon word of length >= 2:
/// the right factor `w[split..]` is the longest proper Lyndon suffix.
fn standard_factorization_split(w: &[usize]) -> usize {
    debug_assert!(w.len() >= 2);
    for split in 1..w.len() {
        if is_lyndon(&w[split..]) {
            return split;
        }
    }
    unreachable!("every Lyndon word of length >= 2 has a proper Lyndon suffix")
}

fn build_tree(w: &[usize]) -> LyndonTree {
    if w.len() == 1 {
        return LyndonTree::leaf(w[0]);
    }
    let split = standard_factorization_split(w);
    let left = build_tree(&w[..split]);
    let right = build_tree(&w[split..]);
    LyndonTree {
        word: w.to_vec(),
        kind: TreeKind::Node(Box::new(left), Box::new(right)),
    }
}

/// Duval's algorithm: all Lyndon words over `{1..n_letters}` of length at
/// most `max_degree`, in lexicographic order.
fn duval(n_letters: usize, max_degree: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut w = vec![1usize];
    loop {
        out.push(w.clone());
        // Extend periodically to the maximum length, then increment the last
        // letter that can be incremented.
        let prefix = w.clone();
        while w.len() < max_degree {
            w.push(prefix[w.len() % prefix.len()]);
        }
        while let Some(&last) = w.last() {
            if last == n_letters {
                w.pop();
            } else {
                break;
            }
        }
        if w.is_empty() {
            return out;
        }
        *w.last_mut().unwrap() += 1;
    }
}

/// All Lyndon trees of degree <= `max_degree` on `n_letters` letters,
/// sorted by (degree, lexicographic word).
pub fn lyndon_basis(n_letters: usize, max_degree: usize) -> Result<Vec<LyndonTree>> {
    if n_letters < 1 {
        return Err(Error::invalid("n_letters must be >= 1"));
    }
    if max_degree < 1 {
        return Err(Error::invalid("max_degree must be >= 1"));
    }
    let mut words = duval(n_letters, max_degree);
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(words.iter().map(|w| build_tree(w)).collect())
}

/// Lyndon trees of degree in `[2, max_degree]`: a basis of the commutator
/// ideal truncated at that degree.
pub fn commutator_ideal_basis(n_letters: usize, max_degree: usize) -> Result<Vec<LyndonTree>> {
    Ok(lyndon_basis(n_letters, max_degree)?
        .into_iter()
        .filter(|t| t.degree() >= 2)
        .collect())
}

/// Number of degree-`d` basis elements of the free Lie algebra on `q`
/// letters: `(1/d) * sum_{e | d} mu(e) q^(d/e)`.
pub fn witt_count(q: usize, d: usize) -> usize {
    assert!(d >= 1);
    let mut total: i64 = 0;
    for e in 1..=d {
        if d % e == 0 {
            total += moebius(e) * (q as i64).pow((d / e) as u32);
        }
    }
    (total / d as i64) as usize
}

fn moebius(n: usize) -> i64 {
    let mut n = n;
    let mut factors = 0;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            factors += 1;
        }
        p += 1;
    }
    if n > 1 {
        factors += 1;
    }
    if factors % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Bracket, addition, scaling, and norm callbacks for evaluating words in a
/// concrete algebra. Values are opaque to this module.
pub struct BracketContext<V> {
    pub bracket: Box<dyn Fn(&V, &V) -> V + Send + Sync>,
    pub add: Box<dyn Fn(&V, &V) -> V + Send + Sync>,
    pub scale: Box<dyn Fn(&V, f64) -> V + Send + Sync>,
    pub norm: Box<dyn Fn(&V) -> f64 + Send + Sync>,
}

impl<V> BracketContext<V> {
    /// Max bilinearity defect of the bracket callback over consecutive probe
    /// triples, as a smoke test of a user-supplied context.
    pub fn bilinearity_defect(&self, probes: &[V]) -> f64 {
        let mut worst: f64 = 0.0;
        for win in probes.windows(3) {
            let (x, y, z) = (&win[0], &win[1], &win[2]);
            let lam = 0.37;
            // [x + lam y, z] - [x, z] - lam [y, z]
            let lhs = (self.bracket)(&(self.add)(x, &(self.scale)(y, lam)), z);
            let rhs = (self.add)(
                &(self.bracket)(x, z),
                &(self.scale)(&(self.bracket)(y, z), lam),
            );
            worst = worst.max((self.norm)(&(self.add)(&lhs, &(self.scale)(&rhs, -1.0))));
            // [z, x + lam y] - [z, x] - lam [z, y]
            let lhs = (self.bracket)(z, &(self.add)(x, &(self.scale)(y, lam)));
            let rhs = (self.add)(
                &(self.bracket)(z, x),
                &(self.scale)(&(self.bracket)(z, y), lam),
            );
            worst = worst.max((self.norm)(&(self.add)(&lhs, &(self.scale)(&rhs, -1.0))));
        }
        worst
    }
}

impl BracketContext<crate::liealg::LieElement> {
    /// Matrix commutator context. Evaluation panics on incompatible
    /// elements; callers are expected to pass a homogeneous point set.
    pub fn matrix() -> Self {
        BracketContext {
            bracket: Box::new(|x, y| x.bracket(y).expect("compatible elements")),
            add: Box::new(|x, y| x.add(y).expect("compatible elements")),
            scale: Box::new(|x, c| x.scale(c)),
            norm: Box::new(|x| x.frobenius_norm()),
        }
    }
}

/// Evaluate a tree by substituting `points[i-1]` for letter `i` and applying
/// the context's bracket at each node.
pub fn evaluate<V>(tree: &LyndonTree, points: &[V], ctx: &BracketContext<V>) -> Result<V>
where
    V: Clone,
{
    if tree.max_letter() > points.len() {
        return Err(Error::ArityMismatch {
            expected: tree.max_letter(),
            found: points.len(),
        });
    }
    Ok(evaluate_inner(tree, points, ctx))
}

fn evaluate_inner<V: Clone>(tree: &LyndonTree, points: &[V], ctx: &BracketContext<V>) -> V {
    match &tree.kind {
        TreeKind::Leaf(l) => points[l - 1].clone(),
        TreeKind::Node(a, b) => {
            let left = evaluate_inner(a, points, ctx);
            let right = evaluate_inner(b, points, ctx);
            (ctx.bracket)(&left, &right)
        }
    }
}

/// Right-nested standard monomial `[b1, [b2, [... [b_{k-1}, b_k]]]]` over an
/// arbitrary word. These span the free Lie algebra and provide an alternate
/// family for the word-identity sweep.
pub fn right_nested_monomial<V>(word: &[usize], points: &[V], ctx: &BracketContext<V>) -> Result<V>
where
    V: Clone,
{
    if word.is_empty() {
        return Err(Error::invalid("empty word"));
    }
    if let Some(&m) = word.iter().max() {
        if m > points.len() || word.iter().any(|&l| l == 0) {
            return Err(Error::ArityMismatch {
                expected: m,
                found: points.len(),
            });
        }
    }
    let mut acc = points[word[word.len() - 1] - 1].clone();
    for &letter in word[..word.len() - 1].iter().rev() {
        acc = (ctx.bracket)(&points[letter - 1], &acc);
    }
    Ok(acc)
}

/// All words of the given exact length over `{1..n_letters}`.
pub fn all_words(n_letters: usize, length: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..length {
        let mut next = Vec::with_capacity(out.len() * n_letters);
        for w in &out {
            for l in 1..=n_letters {
                let mut w2 = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}
