//! Tadpole graphs at the abelianized chain level: wedge words in the odd
//! generators `s_k` (tadpoles) and `b_ij` (edges), the map γ from chords to
//! graph chains, elimination of the index `n`, the cyclic action, planar
//! composition, and extraction and printing of BV classes.
//!
//! A monomial on the n-gon is stored as a bitmask over the `n - 1` tadpoles
//! followed by the `C(n-1, 2)` edges in lexicographic order, which is also
//! the canonical order of the generators. This supports `n <= 11`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::diagrams::{Chord, ChordMonomial};
use crate::error::{domain, Error, Result};
use crate::sign::sort_odd;
use crate::Q;

/// Largest polygon size whose generators fit in a 64-bit mask.
pub const MAX_N: usize = 11;

/// A generator of the graph algebra: a tadpole at vertex `k` or an edge
/// between vertices `i < j`. The derived order is the canonical one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    S(usize),
    B(usize, usize),
}

impl Gen {
    /// Edge generator with endpoints in either order.
    pub fn edge(i: usize, j: usize) -> Gen {
        if i < j {
            Gen::B(i, j)
        } else {
            Gen::B(j, i)
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            Gen::S(k) => k,
            Gen::B(_, j) => j,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gen::S(k) => write!(f, "s{k}"),
            Gen::B(i, j) if j < 10 => write!(f, "b{i}{j}"),
            Gen::B(i, j) => write!(f, "b{i}_{j}"),
        }
    }
}

/// Number of generators on the n-gon.
fn generator_count(n: usize) -> usize {
    let m = n - 1;
    m + m * (m - 1) / 2
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return domain(format!("graph algebra supports 2 <= n <= {MAX_N}, got {n}"));
    }
    Ok(())
}

/// Bit position of an index-`n`-free generator.
fn bit(n: usize, g: Gen) -> Option<u32> {
    let m = n - 1;
    match g {
        Gen::S(k) if (1..=m).contains(&k) => Some((k - 1) as u32),
        Gen::B(i, j) if 1 <= i && i < j && j <= m => {
            let offset: usize = (1..i).map(|a| m - a).sum();
            Some((m + offset + (j - i - 1)) as u32)
        }
        _ => None,
    }
}

/// Generators in canonical order.
pub fn generators(n: usize) -> Vec<Gen> {
    let m = n - 1;
    let mut out: Vec<Gen> = (1..=m).map(Gen::S).collect();
    for i in 1..=m {
        for j in i + 1..=m {
            out.push(Gen::B(i, j));
        }
    }
    out
}

fn gen_at(n: usize, b: u32) -> Gen {
    let m = n - 1;
    let b = b as usize;
    if b < m {
        return Gen::S(b + 1);
    }
    let mut r = b - m;
    for i in 1..m {
        let row = m - i;
        if r < row {
            return Gen::B(i, i + 1 + r);
        }
        r -= row;
    }
    unreachable!("bit {b} out of range for n = {n}")
}

fn mask_gens(n: usize, mask: u64) -> Vec<Gen> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut x = mask;
    while x != 0 {
        let b = x.trailing_zeros();
        out.push(gen_at(n, b));
        x &= x - 1;
    }
    out
}

/// Sign of `a ∧ b` relative to the sorted word of `a | b`, or `None` if they
/// share a generator.
fn merge_sign(a: u64, b: u64) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut odd = false;
    let mut x = b;
    while x != 0 {
        let y = x.trailing_zeros();
        let above = if y >= 63 { 0 } else { a >> (y + 1) };
        odd ^= above.count_ones() % 2 == 1;
        x &= x - 1;
    }
    Some(odd)
}

/// A signed wedge word of distinct generators in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphMonomial {
    pub n: usize,
    pub gens: Vec<Gen>,
    pub sign: i8,
}

impl GraphMonomial {
    /// Canonicalizes an ordered word. Returns `Ok(None)` on a repeated
    /// generator.
    pub fn new(n: usize, word: &[Gen]) -> Result<Option<GraphMonomial>> {
        check_n(n)?;
        if let Some(g) = word.iter().find(|g| bit(n, **g).is_none()) {
            return domain(format!("generator {g} is not index-{n} free"));
        }
        let mut gens = word.to_vec();
        Ok(sort_odd(&mut gens).map(|sign| GraphMonomial { n, gens, sign }))
    }

    pub fn degree(&self) -> usize {
        self.gens.len()
    }

    fn mask(&self) -> u64 {
        self.gens.iter().fold(0, |m, g| m | 1u64 << bit(self.n, *g).expect("validated"))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.gens.iter().filter_map(|g| match *g {
            Gen::B(i, j) => Some((i, j)),
            Gen::S(_) => None,
        })
    }

    pub fn tadpoles(&self) -> impl Iterator<Item = usize> + '_ {
        self.gens.iter().filter_map(|g| match *g {
            Gen::S(k) => Some(k),
            Gen::B(..) => None,
        })
    }
}

impl fmt::Display for GraphMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign < 0 {
            write!(f, "-")?;
        }
        if self.gens.is_empty() {
            return write!(f, "1");
        }
        for g in &self.gens {
            write!(f, "{g}")?;
        }
        Ok(())
    }
}

/// A rational combination of canonical graph monomials on the n-gon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphChain {
    pub n: usize,
    terms: BTreeMap<u64, Q>,
}

impl GraphChain {
    pub fn zero(n: usize) -> GraphChain {
        GraphChain { n, terms: BTreeMap::new() }
    }

    pub fn unit(n: usize) -> GraphChain {
        GraphChain { n, terms: BTreeMap::from([(0, Q::one())]) }
    }

    /// A single generator with coefficient one.
    pub fn generator(n: usize, g: Gen) -> Result<GraphChain> {
        check_n(n)?;
        let b = bit(n, g).ok_or_else(|| Error::Domain(format!("generator {g} is not index-{n} free")))?;
        Ok(GraphChain { n, terms: BTreeMap::from([(1u64 << b, Q::one())]) })
    }

    pub fn from_monomial(m: &GraphMonomial, coef: Q) -> GraphChain {
        let mut c = GraphChain::zero(m.n);
        c.add_mask(m.mask(), if m.sign < 0 { -coef } else { coef });
        c
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_mask(&mut self, mask: u64, coef: Q) {
        if coef.is_zero() {
            return;
        }
        let e = self.terms.entry(mask).or_insert_with(Q::zero);
        *e += coef;
        if e.is_zero() {
            self.terms.remove(&mask);
        }
    }

    /// Adds `coef` times the ordered word `word`.
    pub fn add_word(&mut self, word: &[Gen], coef: Q) -> Result<()> {
        if let Some(m) = GraphMonomial::new(self.n, word)? {
            self.add_mask(m.mask(), if m.sign < 0 { -coef } else { coef });
        }
        Ok(())
    }

    pub fn add(&self, other: &GraphChain) -> GraphChain {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_mask(*m, c.clone());
        }
        out
    }

    /// `self += s · other`.
    pub fn add_scaled(&mut self, other: &GraphChain, s: &Q) {
        for (m, c) in &other.terms {
            self.add_mask(*m, c * s);
        }
    }

    pub fn sub(&self, other: &GraphChain) -> GraphChain {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, s: &Q) -> GraphChain {
        let mut out = GraphChain::zero(self.n);
        if s.is_zero() {
            return out;
        }
        for (m, c) in &self.terms {
            out.terms.insert(*m, c * s);
        }
        out
    }

    /// Wedge product `self ∧ other`.
    pub fn wedge(&self, other: &GraphChain) -> GraphChain {
        let mut out = GraphChain::zero(self.n);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some(odd) = merge_sign(*a, *b) {
                    let c = x * y;
                    out.add_mask(a | b, if odd { -c } else { c });
                }
            }
        }
        out
    }

    /// Canonical monomials with their coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (GraphMonomial, &Q)> + '_ {
        self.terms.iter().map(move |(m, c)| (GraphMonomial { n: self.n, gens: mask_gens(self.n, *m), sign: 1 }, c))
    }

    /// Coefficient of a (signed) monomial.
    pub fn coefficient(&self, m: &GraphMonomial) -> Q {
        let c = self.terms.get(&m.mask()).cloned().unwrap_or_else(Q::zero);
        if m.sign < 0 {
            -c
        } else {
            c
        }
    }

    /// Applies an algebra map given on generators; `f` returns the image of
    /// each generator as a chain on the target polygon.
    pub fn substitute(&self, target_n: usize, f: impl Fn(Gen) -> GraphChain) -> GraphChain {
        let images: Vec<GraphChain> = generators(self.n).into_iter().map(f).collect();
        let mut out = GraphChain::zero(target_n);
        for (m, c) in &self.terms {
            let mut acc = GraphChain::unit(target_n).scale(c);
            let mut x = *m;
            while x != 0 {
                let b = x.trailing_zeros();
                acc = acc.wedge(&images[b as usize]);
                x &= x - 1;
            }
            out = out.add(&acc);
        }
        out
    }
}

impl fmt::Display for GraphChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !abs.is_one() {
                write!(f, "{abs}*")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

/// The generator sum attached to a set of consecutive sides `r`:
/// all edges inside `r` and all tadpoles in `r`.
fn interval_sum(n: usize, r: &[usize]) -> Result<GraphChain> {
    let mut out = GraphChain::zero(n);
    for (a, &x) in r.iter().enumerate() {
        out = out.add(&extended_generator(n, Gen::S(x))?);
        for &y in &r[a + 1..] {
            out = out.add(&extended_generator(n, Gen::edge(x, y))?);
        }
    }
    Ok(out)
}

/// The sides strictly after `i` up to and including `j`, for a chord `{i,j}`
/// written with `i < j` in the order `n < 1 < ... < n-1`.
fn chord_interval(c: &Chord) -> Vec<usize> {
    let (lo, hi) = c.endpoints();
    if hi == c.n() {
        (1..=lo).collect()
    } else {
        (lo + 1..=hi).collect()
    }
}

/// γ(δ_c): the sum of all edges and tadpoles on the sides separated from
/// side `n` by the chord.
pub fn gamma_generator(n: usize, c: &Chord) -> Result<GraphChain> {
    check_n(n)?;
    if c.n() != n {
        return domain(format!("chord {c} does not live on the {n}-gon"));
    }
    interval_sum(n, &chord_interval(c))
}

/// γ applied to a chord monomial: the wedge of the γ(δ_c) in the
/// monomial's order, times its sign.
pub fn gamma_chain(m: &ChordMonomial) -> Result<GraphChain> {
    let mut acc = GraphChain::unit(m.n);
    for c in &m.chords {
        acc = acc.wedge(&gamma_generator(m.n, c)?);
    }
    Ok(if m.sign < 0 { acc.scale(&-Q::one()) } else { acc })
}

/// γ(δ_c) computed from the complementary set of sides, the one containing
/// side `n`, followed by elimination of the index `n`. Equals
/// [`gamma_generator`] when γ is well defined.
pub fn gamma_generator_complement(n: usize, c: &Chord) -> Result<GraphChain> {
    let inside = chord_interval(c);
    let (lo, hi) = c.endpoints();
    let outside: Vec<usize> = if hi == n { (lo + 1..=n).collect() } else { (hi + 1..=n).chain(1..=lo).collect() };
    debug_assert_eq!(inside.len() + outside.len(), n);
    interval_sum(n, &outside)
}

/// Rewrites a generator that may carry the index `n` into the free basis,
/// using `e_an = -2 e_a - Σ_{i≠a} e_ia` and `e_n = Σ_k e_k + Σ_{i<j} e_ij`
/// (the second rule is `e_n = -½ Σ_j e_jn` with the first substituted).
pub fn eliminate_index_n(g: Gen, n: usize) -> Result<GraphChain> {
    check_n(n)?;
    extended_generator(n, g)
}

fn extended_generator(n: usize, g: Gen) -> Result<GraphChain> {
    let m = n - 1;
    match g {
        Gen::S(k) if k == n => {
            let mut out = GraphChain::zero(n);
            for a in 1..=m {
                out.add_mask(1u64 << bit(n, Gen::S(a)).unwrap(), Q::one());
                for b in a + 1..=m {
                    out.add_mask(1u64 << bit(n, Gen::B(a, b)).unwrap(), Q::one());
                }
            }
            Ok(out)
        }
        Gen::B(a, b) if b == n && 1 <= a && a < n => {
            let mut out = GraphChain::zero(n);
            out.add_mask(1u64 << bit(n, Gen::S(a)).unwrap(), q(-2));
            for i in (1..=m).filter(|&i| i != a) {
                out.add_mask(1u64 << bit(n, Gen::edge(i, a)).unwrap(), q(-1));
            }
            Ok(out)
        }
        _ if g.max_index() <= m => GraphChain::generator(n, g),
        _ => domain(format!("generator {g} has an index beyond {n}")),
    }
}

/// The cyclic action `i ↦ i + 1 (mod n)` followed by elimination of the
/// index `n`.
pub fn cyclic_tau(x: &GraphChain) -> GraphChain {
    let n = x.n;
    let shift = |v: usize| if v == n { 1 } else { v + 1 };
    x.substitute(n, |g| {
        let moved = match g {
            Gen::S(k) => Gen::S(shift(k)),
            Gen::B(i, j) => Gen::edge(shift(i), shift(j)),
        };
        extended_generator(n, moved).expect("shifted generators stay in range")
    })
}

/// One instance of the cyclic compatibility `τ·γ(δ_{r−1,n−1}) = γ(δ_{r,n})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppendixCase {
    pub n: usize,
    pub r: usize,
    pub holds: bool,
}

/// Checks the cyclic compatibility of γ for every `4 <= n <= max_n` and
/// `2 <= r <= n - 2`.
pub fn appendix_identity(max_n: usize) -> Result<Vec<AppendixCase>> {
    if !(4..=MAX_N).contains(&max_n) {
        return domain(format!("max_n must lie in 4..={MAX_N}, got {max_n}"));
    }
    let mut out = Vec::new();
    for n in 4..=max_n {
        for r in 2..=n - 2 {
            let lhs = cyclic_tau(&gamma_generator(n, &Chord::new(n, r - 1, n - 1)?)?);
            let rhs = gamma_generator(n, &Chord::new(n, r, n)?)?;
            out.push(AppendixCase { n, r, holds: lhs == rhs });
        }
    }
    Ok(out)
}

/// The planar composition `a ∘_slot b`: vertex `slot` of `a` is replaced by
/// the vertices of `b`, and its edges and tadpoles are distributed over them
/// in all ways. Computed as the wedge of the images of the two monomials
/// under the operadic Lie algebra maps, `a` first.
pub fn compose_graphs(a: &GraphMonomial, b: &GraphMonomial, slot: usize) -> Result<GraphChain> {
    let n1 = a.n;
    let k = b.n - 1;
    if slot == 0 || slot >= n1 {
        return domain(format!("slot {slot} is not an input of the {n1}-gon"));
    }
    let n = n1 + k - 1;
    check_n(n)?;
    let block: Vec<usize> = (slot..slot + k).collect();
    let outer = |v: usize| if v < slot { v } else { v + k - 1 };
    let left = GraphChain::from_monomial(a, Q::one()).substitute(n, |g| match g {
        Gen::S(v) if v == slot => interval_sum(n, &block).expect("block in range"),
        Gen::S(v) => GraphChain::generator(n, Gen::S(outer(v))).expect("in range"),
        Gen::B(u, v) if u == slot || v == slot => {
            let other = outer(if u == slot { v } else { u });
            let mut out = GraphChain::zero(n);
            for &w in &block {
                out = out.add(&GraphChain::generator(n, Gen::edge(w, other)).expect("in range"));
            }
            out
        }
        Gen::B(u, v) => GraphChain::generator(n, Gen::B(outer(u), outer(v))).expect("in range"),
    });
    let inner = |w: usize| w + slot - 1;
    let right = GraphChain::from_monomial(b, Q::one()).substitute(n, |g| {
        let moved = match g {
            Gen::S(w) => Gen::S(inner(w)),
            Gen::B(u, v) => Gen::B(inner(u), inner(v)),
        };
        GraphChain::generator(n, moved).expect("in range")
    });
    Ok(left.wedge(&right))
}

/// `a ∘_slot b` extended bilinearly to chains.
pub fn compose_chains(a: &GraphChain, b: &GraphChain, slot: usize) -> Result<GraphChain> {
    if slot == 0 || slot >= a.n || b.n < 2 {
        return domain(format!("slot {slot} is not an input of the {}-gon", a.n));
    }
    let n = a.n + b.n - 2;
    check_n(n)?;
    let mut out = GraphChain::zero(n);
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            out.add_scaled(&compose_graphs(&ma, &mb, slot)?, &(ca * cb));
        }
    }
    Ok(out)
}

/// Normal-form monomials: no factor `b_ij b_jk` with `i < j < k` and no
/// factor `b_ik b_jk b_jl` with `i < j < k < l`.
pub fn is_normal_form(m: &GraphMonomial) -> bool {
    let edges: Vec<(usize, usize)> = m.edges().collect();
    let has = |i: usize, j: usize| edges.contains(&(i, j));
    for &(i, j) in &edges {
        for &(j2, k) in &edges {
            if j2 == j && i < j && j < k {
                return false;
            }
        }
    }
    for &(i, k) in &edges {
        for &(j, k2) in &edges {
            if k2 != k || !(i < j && j < k) {
                continue;
            }
            for &(j2, l) in &edges {
                if j2 == j && k < l && has(j, l) {
                    return false;
                }
            }
        }
    }
    true
}

/// Normal-form monomials of degree `n - 3`, the preferred basis of BV
/// operations of arity `n - 1` and degree `3 - n`.
pub fn bv_basis(n: usize) -> Result<Vec<GraphMonomial>> {
    check_n(n)?;
    if n < 3 {
        return domain(format!("BV basis needs n >= 3, got {n}"));
    }
    let k = n - 3;
    let total = generator_count(n);
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > total {
        return Ok(out);
    }
    loop {
        let mask = idx.iter().fold(0u64, |m, &b| m | 1u64 << b);
        let mono = GraphMonomial { n, gens: mask_gens(n, mask), sign: 1 };
        if is_normal_form(&mono) {
            out.push(mono);
        }
        let mut p = k;
        while p > 0 && idx[p - 1] == total - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return Ok(out);
        }
        idx[p - 1] += 1;
        for r in p..k {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

/// Coefficients of a chain on the normal-form monomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BVClassVector {
    pub n: usize,
    coeffs: BTreeMap<GraphMonomial, Q>,
}

impl BVClassVector {
    pub fn zero(n: usize) -> BVClassVector {
        BVClassVector { n, coeffs: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient(&self, m: &GraphMonomial) -> Q {
        let key = GraphMonomial { sign: 1, ..m.clone() };
        let c = self.coeffs.get(&key).cloned().unwrap_or_else(Q::zero);
        if m.sign < 0 {
            -c
        } else {
            c
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GraphMonomial, &Q)> {
        self.coeffs.iter()
    }

    /// The chain with the same coefficients.
    pub fn to_chain(&self) -> GraphChain {
        let mut out = GraphChain::zero(self.n);
        for (m, c) in &self.coeffs {
            out.add_mask(m.mask(), c.clone());
        }
        out
    }

    /// Terms with their printed word and the coefficient relative to that
    /// word, ordered by number of tadpoles and then by canonical monomial.
    pub fn printed_terms(&self) -> Result<Vec<(BVTerm, Q)>> {
        let mut rows: Vec<(usize, &GraphMonomial, BVTerm, Q)> = Vec::new();
        for (m, c) in &self.coeffs {
            let t = BVTerm::from_monomial(m)?;
            let s = t.display_sign();
            rows.push((m.tadpoles().count(), m, t, if s < 0 { -c.clone() } else { c.clone() }));
        }
        rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        Ok(rows.into_iter().map(|(_, _, t, c)| (t, c)).collect())
    }
}

/// Restriction of a chain to its normal-form monomials.
pub fn extract_bv(x: &GraphChain) -> BVClassVector {
    let mut coeffs = BTreeMap::new();
    for (m, c) in x.terms() {
        if is_normal_form(&m) {
            coeffs.insert(m, c.clone());
        }
    }
    BVClassVector { n: x.n, coeffs }
}

/// One bracket word of a printed BV operation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BVWord {
    /// An input, with `Δ` applied if `tadpole`.
    Leaf {
        index: usize,
        tadpole: bool,
    },
    Bracket(Box<BVWord>, Box<BVWord>),
}

impl BVWord {
    fn min_index(&self) -> usize {
        match self {
            BVWord::Leaf { index, .. } => *index,
            BVWord::Bracket(l, _) => l.min_index(),
        }
    }

    fn max_index(&self) -> usize {
        match self {
            BVWord::Leaf { index, .. } => *index,
            BVWord::Bracket(_, r) => r.max_index(),
        }
    }

    fn edges_preorder(&self, out: &mut Vec<(usize, usize)>) {
        if let BVWord::Bracket(l, r) = self {
            out.push((l.min_index(), r.max_index()));
            l.edges_preorder(out);
            r.edges_preorder(out);
        }
    }

    fn leaves(&self, out: &mut Vec<(usize, bool)>) {
        match self {
            BVWord::Leaf { index, tadpole } => out.push((*index, *tadpole)),
            BVWord::Bracket(l, r) => {
                l.leaves(out);
                r.leaves(out);
            }
        }
    }

    /// Pairs `(X, Y)` of leaf sets of every bracket, in pre-order.
    fn brackets_preorder(&self, out: &mut Vec<(Vec<usize>, Vec<usize>)>) {
        if let BVWord::Bracket(l, r) = self {
            let mut a = Vec::new();
            let mut b = Vec::new();
            l.leaves(&mut a);
            r.leaves(&mut b);
            out.push((a.into_iter().map(|x| x.0).collect(), b.into_iter().map(|x| x.0).collect()));
            l.brackets_preorder(out);
            r.brackets_preorder(out);
        }
    }

    fn render(&self, delta: &str, out: &mut String) {
        match self {
            BVWord::Leaf { index, tadpole } => {
                let idx = if *index < 10 { index.to_string() } else { format!("({index})") };
                if *tadpole {
                    out.push_str(&format!("{delta}({index})"));
                } else {
                    out.push_str(&idx);
                }
            }
            BVWord::Bracket(l, r) => {
                out.push('{');
                l.render(delta, out);
                out.push(',');
                r.render(delta, out);
                out.push('}');
            }
        }
    }
}

/// A printed BV operation: a product of bracket words, one per connected
/// component of the graph, ordered by smallest input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BVTerm {
    pub n: usize,
    pub words: Vec<BVWord>,
}

impl BVTerm {
    /// Decodes a normal-form monomial. Each component must be a tree in
    /// which the edge joining its smallest and largest vertex splits it
    /// into the two sides of the outermost bracket, recursively.
    pub fn from_monomial(m: &GraphMonomial) -> Result<BVTerm> {
        let verts: Vec<usize> = (1..m.n).collect();
        let edges: Vec<(usize, usize)> = m.edges().collect();
        let tadpoles: Vec<usize> = m.tadpoles().collect();
        let mut seen = vec![false; m.n];
        let mut words = Vec::new();
        for &v in &verts {
            if seen[v] {
                continue;
            }
            let comp = component(v, &edges);
            for &x in &comp {
                seen[x] = true;
            }
            let inner: Vec<(usize, usize)> = edges.iter().copied().filter(|(a, _)| comp.contains(a)).collect();
            words.push(decode(&comp, &inner, &tadpoles).ok_or_else(|| {
                Error::Domain(format!("monomial {m} has no bracket-word form on component {comp:?}"))
            })?);
        }
        Ok(BVTerm { n: m.n, words })
    }

    /// The generators in display order: bracket edges in pre-order, word by
    /// word, then tadpoles in increasing order.
    pub fn display_word(&self) -> Vec<Gen> {
        let mut edges = Vec::new();
        let mut leaves = Vec::new();
        for w in &self.words {
            w.edges_preorder(&mut edges);
            w.leaves(&mut leaves);
        }
        let mut tad: Vec<usize> = leaves.into_iter().filter(|l| l.1).map(|l| l.0).collect();
        tad.sort_unstable();
        edges.into_iter().map(|(i, j)| Gen::edge(i, j)).chain(tad.into_iter().map(Gen::S)).collect()
    }

    /// Sign of the display word relative to the canonical monomial.
    fn display_sign(&self) -> i8 {
        let mut w = self.display_word();
        sort_odd(&mut w).expect("printed words have distinct generators")
    }

    /// The canonical monomial and the sign of the display word.
    pub fn monomial(&self) -> Result<GraphMonomial> {
        GraphMonomial::new(self.n, &self.display_word())?
            .ok_or_else(|| Error::Internal("printed word repeats a generator".into()))
    }

    /// A chain representing the operation: each bracket `{X, Y}` contributes
    /// the sum of `b_xy` over `x ∈ X, y ∈ Y`, wedged in pre-order, followed
    /// by the tadpoles in increasing order.
    pub fn representative(&self) -> Result<GraphChain> {
        let n = self.n;
        let mut acc = GraphChain::unit(n);
        let mut brackets = Vec::new();
        let mut leaves = Vec::new();
        for w in &self.words {
            w.brackets_preorder(&mut brackets);
            w.leaves(&mut leaves);
        }
        for (xs, ys) in brackets {
            let mut s = GraphChain::zero(n);
            for &x in &xs {
                for &y in &ys {
                    s = s.add(&GraphChain::generator(n, Gen::edge(x, y))?);
                }
            }
            acc = acc.wedge(&s);
        }
        let mut tad: Vec<usize> = leaves.into_iter().filter(|l| l.1).map(|l| l.0).collect();
        tad.sort_unstable();
        for k in tad {
            acc = acc.wedge(&GraphChain::generator(n, Gen::S(k))?);
        }
        Ok(acc)
    }

    /// Renders with `Δ`, or with `D` when `ascii` is set.
    pub fn render(&self, ascii: bool) -> String {
        let delta = if ascii { "D" } else { "Δ" };
        let mut s = String::new();
        for w in &self.words {
            w.render(delta, &mut s);
        }
        s
    }

    /// Parses the printed notation, for example `{1,Δ(2)}34`.
    pub fn parse(n: usize, s: &str) -> Result<BVTerm> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let mut words = Vec::new();
        while pos < chars.len() {
            words.push(parse_word(&chars, &mut pos)?);
        }
        let mut leaves = Vec::new();
        for w in &words {
            w.leaves(&mut leaves);
        }
        let mut idx: Vec<usize> = leaves.iter().map(|l| l.0).collect();
        idx.sort_unstable();
        if idx != (1..n).collect::<Vec<_>>() {
            return Err(Error::Parse(format!("{s:?} does not use each input 1..{} once", n - 1)));
        }
        Ok(BVTerm { n, words })
    }
}

impl fmt::Display for BVTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render(false))
    }
}

fn parse_index(c: &[char], pos: &mut usize) -> Result<usize> {
    let at = *pos;
    if c.get(*pos) == Some(&'(') {
        *pos += 1;
        let start = *pos;
        while c.get(*pos).is_some_and(|x| x.is_ascii_digit()) {
            *pos += 1;
        }
        let v: String = c[start..*pos].iter().collect();
        if c.get(*pos) != Some(&')') || v.is_empty() {
            return Err(Error::Parse(format!("bad index at position {at}")));
        }
        *pos += 1;
        return v.parse().map_err(|_| Error::Parse(format!("bad index at position {at}")));
    }
    match c.get(*pos).and_then(|x| x.to_digit(10)) {
        Some(d) => {
            *pos += 1;
            Ok(d as usize)
        }
        None => Err(Error::Parse(format!("expected an index at position {at}"))),
    }
}

fn parse_word(c: &[char], pos: &mut usize) -> Result<BVWord> {
    let at = *pos;
    match c.get(*pos) {
        Some('{') => {
            *pos += 1;
            let l = parse_word(c, pos)?;
            if c.get(*pos) != Some(&',') {
                return Err(Error::Parse(format!("expected ',' at position {}", *pos)));
            }
            *pos += 1;
            let r = parse_word(c, pos)?;
            if c.get(*pos) != Some(&'}') {
                return Err(Error::Parse(format!("expected '}}' at position {}", *pos)));
            }
            *pos += 1;
            Ok(BVWord::Bracket(Box::new(l), Box::new(r)))
        }
        Some('Δ') | Some('D') => {
            *pos += 1;
            if c.get(*pos) != Some(&'(') {
                return Err(Error::Parse(format!("expected '(' after Δ at position {at}")));
            }
            let index = parse_index(c, pos)?;
            Ok(BVWord::Leaf { index, tadpole: true })
        }
        Some(_) => Ok(BVWord::Leaf { index: parse_index(c, pos)?, tadpole: false }),
        None => Err(Error::Parse("unexpected end of input".into())),
    }
}

fn component(v: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut comp = vec![v];
    let mut i = 0;
    while i < comp.len() {
        let x = comp[i];
        for &(a, b) in edges {
            let y = if a == x {
                b
            } else if b == x {
                a
            } else {
                continue;
            };
            if !comp.contains(&y) {
                comp.push(y);
            }
        }
        i += 1;
    }
    comp.sort_unstable();
    comp
}

fn decode(comp: &[usize], edges: &[(usize, usize)], tadpoles: &[usize]) -> Option<BVWord> {
    if comp.len() == 1 {
        return Some(BVWord::Leaf { index: comp[0], tadpole: tadpoles.contains(&comp[0]) });
    }
    if edges.len() + 1 != comp.len() {
        return None;
    }
    let (lo, hi) = (comp[0], comp[comp.len() - 1]);
    let rest: Vec<(usize, usize)> = edges.iter().copied().filter(|&e| e != (lo, hi)).collect();
    if rest.len() == edges.len() {
        return None;
    }
    let left = component(lo, &rest);
    let right: Vec<usize> = comp.iter().copied().filter(|x| !left.contains(x)).collect();
    let (le, re): (Vec<_>, Vec<_>) = rest.into_iter().partition(|(a, _)| left.contains(a));
    let l = decode(&left, &le, tadpoles)?;
    let r = decode(&right, &re, tadpoles)?;
    Some(BVWord::Bracket(Box::new(l), Box::new(r)))
}

/// Renders a class vector as a signed sum of printed operations.
pub fn pretty_print_bv(v: &BVClassVector) -> Result<String> {
    render_terms(&v.printed_terms()?, false)
}

/// As [`pretty_print_bv`] with `D` in place of `Δ`.
pub fn pretty_print_bv_ascii(v: &BVClassVector) -> Result<String> {
    render_terms(&v.printed_terms()?, true)
}

fn render_terms(terms: &[(BVTerm, Q)], ascii: bool) -> Result<String> {
    if terms.is_empty() {
        return Ok("0".into());
    }
    let mut s = String::new();
    for (i, (t, c)) in terms.iter().enumerate() {
        let neg = c.is_negative();
        match (i, neg) {
            (0, true) => s.push('-'),
            (0, false) => {}
            (_, true) => s.push_str(" - "),
            (_, false) => s.push_str(" + "),
        }
        let abs = c.abs();
        if !abs.is_one() {
            s.push_str(&format!("{abs}*"));
        }
        s.push_str(&t.render(ascii));
    }
    Ok(s)
}

/// Parses a signed sum of printed operations back into a class vector.
pub fn parse_bv(n: usize, s: &str) -> Result<BVClassVector> {
    let mut out = BVClassVector::zero(n);
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact == "0" {
        return Ok(out);
    }
    let mut pieces: Vec<(bool, String)> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    for ch in compact.chars() {
        match ch {
            '{' | '(' => depth += 1,
            '}' | ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') {
            if !cur.is_empty() {
                pieces.push((neg, std::mem::take(&mut cur)));
            }
            neg = ch == '-';
            continue;
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        pieces.push((neg, cur));
    }
    for (neg, body) in pieces {
        let (coef, word) = match body.split_once('*') {
            Some((c, w)) => {
                (c.parse::<Q>().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?, w.to_string())
            }
            None => (Q::one(), body),
        };
        let t = BVTerm::parse(n, &word)?;
        let m = t.monomial()?;
        let c = if neg { -coef } else { coef };
        let c = if m.sign < 0 { -c } else { c };
        let key = GraphMonomial { sign: 1, ..m };
        let e = out.coeffs.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            out.coeffs.remove(&key);
        }
    }
    Ok(out)
}
