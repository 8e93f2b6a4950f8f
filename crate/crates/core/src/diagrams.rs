//! Chords, chord monomials, tesselations and prime bracketings on a labelled
//! n-gon.
//!
//! Vertices are labelled `1..=n`; vertex `i` sits between side `i` and side
//! `i+1`. A chord is an unordered pair of vertices that are not cyclically
//! consecutive.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::sign::{shuffle_sign, sort_odd};

/// An unordered pair `{lo, hi}` of non-adjacent vertices of an n-gon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chord {
    n: u8,
    lo: u8,
    hi: u8,
}

impl Chord {
    /// Builds the chord `{i, j}` on the n-gon. The endpoints may be given in
    /// either order.
    pub fn new(n: usize, i: usize, j: usize) -> Result<Chord> {
        if !(4..=64).contains(&n) {
            return domain(format!("polygon size {n} out of range"));
        }
        if i == 0 || j == 0 || i > n || j > n {
            return domain(format!("chord {{{i},{j}}} has an endpoint outside 1..={n}"));
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        if lo == hi || hi - lo == 1 || (lo == 1 && hi == n) {
            return domain(format!("{{{i},{j}}} is not a chord of the {n}-gon"));
        }
        Ok(Chord { n: n as u8, lo: lo as u8, hi: hi as u8 })
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn lo(&self) -> usize {
        self.lo as usize
    }

    pub fn hi(&self) -> usize {
        self.hi as usize
    }

    pub fn endpoints(&self) -> (usize, usize) {
        (self.lo(), self.hi())
    }

    /// Relabels the endpoints through `f` (a bijection of the vertices).
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Chord {
        Chord::new(self.n(), f(self.lo()), f(self.hi())).expect("relabelling by a dihedral symmetry keeps chords")
    }
}

impl fmt::Display for Chord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// The set χ₁(n) of chords of the n-gon, in the fixed total order.
pub fn chords(n: usize) -> Result<Vec<Chord>> {
    if n < 4 {
        return domain(format!("an {n}-gon has no chords (need n >= 4)"));
    }
    Ok(chords_unchecked(n))
}

/// Same as [`chords`] but returns the empty list for triangles.
pub(crate) fn chords_unchecked(n: usize) -> Vec<Chord> {
    let mut out = Vec::new();
    if n < 4 {
        return out;
    }
    for i in 1..=n {
        for j in i + 2..=n {
            if !(i == 1 && j == n) {
                out.push(Chord { n: n as u8, lo: i as u8, hi: j as u8 });
            }
        }
    }
    out
}

/// Crossing test without the polygon-size check.
pub(crate) fn cross(a: &Chord, b: &Chord) -> bool {
    let (i, j) = a.endpoints();
    let (k, l) = b.endpoints();
    if k == i || k == j || l == i || l == j {
        return false;
    }
    let inside = |x: usize| i < x && x < j;
    inside(k) != inside(l)
}

/// Whether two chords cross: the endpoints of one lie in different
/// components of the polygon cut along the other.
pub fn crosses(a: &Chord, b: &Chord) -> Result<bool> {
    if a.n != b.n {
        return domain(format!("chords {a} and {b} live on polygons of different sizes"));
    }
    Ok(cross(a, b))
}

/// The set of chords crossing every member of `a`.
pub fn perp(a: &BTreeSet<Chord>, n: usize) -> BTreeSet<Chord> {
    chords_unchecked(n).into_iter().filter(|c| a.iter().all(|x| cross(c, x))).collect()
}

/// Completely crossing pairs `(A, B)` with `A^⊥ = B` and `B^⊥ = A`, each
/// unordered pair listed once (with the smaller set first).
pub fn complete_crossing_pairs(n: usize) -> Result<Vec<(BTreeSet<Chord>, BTreeSet<Chord>)>> {
    let all = chords(n)?;
    let mut seeds: Vec<BTreeSet<Chord>> = all.iter().map(|c| BTreeSet::from([*c])).collect();
    for (x, a) in all.iter().enumerate() {
        for b in &all[x + 1..] {
            seeds.push(BTreeSet::from([*a, *b]));
        }
    }
    let mut found = BTreeSet::new();
    for s in seeds {
        let b = perp(&s, n);
        if b.is_empty() {
            continue;
        }
        let a = perp(&b, n);
        if a.is_empty() {
            continue;
        }
        debug_assert_eq!(perp(&a, n), b);
        let pair = if a <= b { (a, b) } else { (b, a) };
        found.insert(pair);
    }
    Ok(found.into_iter().collect())
}

/// A signed product of distinct chords in canonical (sorted) order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChordMonomial {
    pub n: usize,
    pub chords: Vec<Chord>,
    pub sign: i8,
}

impl ChordMonomial {
    /// The unit (empty) monomial.
    pub fn unit(n: usize) -> ChordMonomial {
        ChordMonomial { n, chords: Vec::new(), sign: 1 }
    }

    pub fn degree(&self) -> usize {
        self.chords.len()
    }

    pub fn contains(&self, c: &Chord) -> bool {
        self.chords.binary_search(c).is_ok()
    }

    /// Builds a monomial from `(i, j)` endpoint pairs in the given order.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Option<ChordMonomial>> {
        let cs = pairs.iter().map(|&(i, j)| Chord::new(n, i, j)).collect::<Result<Vec<_>>>()?;
        Ok(canonicalize(n, &cs))
    }
}

impl fmt::Display for ChordMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.chords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}[{}]", if self.sign < 0 { "-" } else { "+" }, body.join(","))
    }
}

/// Sorts the chords, recording the permutation parity. Returns `None` for a
/// repeated chord (the product vanishes).
pub fn canonicalize(n: usize, chords: &[Chord]) -> Option<ChordMonomial> {
    let mut v = chords.to_vec();
    let sign = sort_odd(&mut v)?;
    Some(ChordMonomial { n, chords: v, sign })
}

/// A set of pairwise non-crossing chords.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tesselation {
    pub n: usize,
    pub chords: BTreeSet<Chord>,
}

impl Tesselation {
    pub fn new(n: usize, chords: BTreeSet<Chord>) -> Result<Tesselation> {
        let v: Vec<_> = chords.iter().collect();
        for (x, a) in v.iter().enumerate() {
            if a.n() != n {
                return domain(format!("chord {a} is not on the {n}-gon"));
            }
            for b in &v[x + 1..] {
                if cross(a, b) {
                    return domain(format!("chords {a} and {b} cross"));
                }
            }
        }
        Ok(Tesselation { n, chords })
    }

    /// Vertex counts of the polygons cut out by the tesselation.
    pub fn polygon_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let verts: Vec<usize> = (1..=self.n).collect();
        let cs: Vec<(usize, usize)> = self.chords.iter().map(|c| c.endpoints()).collect();
        split_sizes(verts, cs, &mut sizes);
        sizes.sort_unstable();
        sizes
    }
}

fn split_sizes(verts: Vec<usize>, chords: Vec<(usize, usize)>, out: &mut Vec<usize>) {
    let Some(&(a, b)) = chords.first() else {
        out.push(verts.len());
        return;
    };
    let pa = verts.iter().position(|&v| v == a).unwrap();
    let pb = verts.iter().position(|&v| v == b).unwrap();
    let (pa, pb) = (pa.min(pb), pa.max(pb));
    let inner: Vec<usize> = verts[pa..=pb].to_vec();
    let mut outer: Vec<usize> = verts[..=pa].to_vec();
    outer.extend_from_slice(&verts[pb..]);
    let (mut ci, mut co) = (Vec::new(), Vec::new());
    for &(x, y) in &chords[1..] {
        if inner.contains(&x) && inner.contains(&y) {
            ci.push((x, y));
        } else {
            co.push((x, y));
        }
    }
    split_sizes(inner, ci, out);
    split_sizes(outer, co, out);
}

/// All tesselations of the n-gon (including the empty one).
pub fn tesselations(n: usize) -> Vec<Tesselation> {
    let all = chords_unchecked(n);
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(all: &[Chord], start: usize, current: &mut Vec<Chord>, n: usize, out: &mut Vec<Tesselation>) {
        out.push(Tesselation { n, chords: current.iter().copied().collect() });
        for i in start..all.len() {
            if current.iter().all(|c| !cross(c, &all[i])) {
                current.push(all[i]);
                rec(all, i + 1, current, n, out);
                current.pop();
            }
        }
    }
    rec(&all, 0, &mut current, n, &mut out);
    out
}

/// Splits the polygon along `c`. Returns the reindexed monomials on the
/// polygon with vertices `{1..i, j..n}` and on the polygon with vertices
/// `{i..j}`, where `c = {i, j}`. The sign is the Koszul sign of moving the
/// chords of the first polygon in front of those of the second. Returns
/// `Ok(None)` if `c` belongs to `m` or crosses one of its chords.
pub fn cocompose(m: &ChordMonomial, c: &Chord) -> Result<Option<(ChordMonomial, ChordMonomial)>> {
    if c.n() != m.n {
        return domain(format!("chord {c} does not live on the {}-gon", m.n));
    }
    Ok(split_along(m, c))
}

pub(crate) fn split_along(m: &ChordMonomial, c: &Chord) -> Option<(ChordMonomial, ChordMonomial)> {
    let n = m.n;
    let (i, j) = c.endpoints();
    let k = j - i;
    let (n1, n2) = (n - k + 1, k + 1);
    let mut flags = Vec::with_capacity(m.chords.len());
    let mut left = Vec::new();
    let mut right = Vec::new();
    for x in &m.chords {
        if x == c || cross(x, c) {
            return None;
        }
        let (a, b) = x.endpoints();
        if i <= a && b <= j {
            flags.push(false);
            right.push(Chord { n: n2 as u8, lo: (a - i + 1) as u8, hi: (b - i + 1) as u8 });
        } else {
            flags.push(true);
            let re = |v: usize| if v <= i { v } else { v - k + 1 };
            left.push(Chord { n: n1 as u8, lo: re(a) as u8, hi: re(b) as u8 });
        }
    }
    let s = shuffle_sign(&flags);
    let l = canonicalize(n1, &left)?;
    let r = canonicalize(n2, &right)?;
    let sign = s * l.sign * r.sign * m.sign;
    Some((ChordMonomial { sign: 1, ..l }, ChordMonomial { sign, ..r }))
}

/// Combinatorial residue along `c`: remove `c` (with the sign of moving it to
/// the front) and split along it. Zero if `c` is absent or crossed by
/// another chord of `m`.
pub fn residue_diagram(m: &ChordMonomial, c: &Chord) -> Option<(ChordMonomial, ChordMonomial)> {
    let pos = m.chords.iter().position(|x| x == c)?;
    let mut rest = m.chords.clone();
    rest.remove(pos);
    let sign = if pos % 2 == 0 { m.sign } else { -m.sign };
    let stripped = ChordMonomial { n: m.n, chords: rest, sign };
    split_along(&stripped, c)
}

/// Whether a pair of crossing chords forms an inadmissible configuration
/// inside `m`. With the four endpoints `a < b < c < d`, the quadrilateral
/// side facing the distinguished side `n` (between vertices `n-1` and `n`)
/// is `{d, a}` when `d < n` and `{c, d}` when `d = n`; the configuration is
/// inadmissible when the opposite side is a polygon side or a chord of `m`.
fn inadmissible(m: &ChordMonomial, x: &Chord, y: &Chord) -> bool {
    let mut v = [x.lo(), x.hi(), y.lo(), y.hi()];
    v.sort_unstable();
    let [a, b, c, d] = v;
    let (p, q) = if d == m.n { (a, b) } else { (b, c) };
    if q == p + 1 {
        return true;
    }
    let opposite = Chord { n: m.n as u8, lo: p as u8, hi: q as u8 };
    m.contains(&opposite)
}

/// Gravity diagrams: not divisible by any inadmissible diagram.
pub fn is_gravity(m: &ChordMonomial) -> bool {
    let cs = &m.chords;
    for (x, a) in cs.iter().enumerate() {
        for b in &cs[x + 1..] {
            if cross(a, b) && inadmissible(m, a, b) {
                return false;
            }
        }
    }
    true
}

/// Prime diagrams: gravity diagrams in which every chord is crossed by some
/// other chord (so no chord is residual).
pub fn is_prime(m: &ChordMonomial) -> bool {
    is_gravity(m) && m.chords.iter().all(|c| residue_diagram(m, c).is_none())
}

/// Which diagrams [`enumerate`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagramClass {
    All,
    Gravity,
    Prime,
}

impl std::str::FromStr for DiagramClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(DiagramClass::All),
            "gravity" => Ok(DiagramClass::Gravity),
            "prime" => Ok(DiagramClass::Prime),
            other => Err(Error::Parse(format!("unknown diagram class {other:?}"))),
        }
    }
}

/// All canonical monomials with `k` chords on the n-gon, any degree and any
/// `n >= 3`.
pub(crate) fn monomials(n: usize, k: usize) -> Vec<ChordMonomial> {
    let all = chords_unchecked(n);
    let mut out = Vec::new();
    if k > all.len() {
        return out;
    }
    let m = all.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(ChordMonomial { n, chords: idx.iter().map(|&i| all[i]).collect(), sign: 1 });
        let mut p = k;
        while p > 0 && idx[p - 1] == m - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return out;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Monomials of `k` chords in the requested class, any `n >= 3`, any `k`.
pub(crate) fn enumerate_any(n: usize, k: usize, class: DiagramClass) -> Vec<ChordMonomial> {
    let all = monomials(n, k);
    match class {
        DiagramClass::All => all,
        DiagramClass::Gravity => all.into_iter().filter(is_gravity).collect(),
        DiagramClass::Prime => all.into_iter().filter(is_prime).collect(),
    }
}

/// All canonical monomials with `k` chords on the n-gon in the given class.
pub fn enumerate(n: usize, k: usize, class: DiagramClass) -> Result<Vec<ChordMonomial>> {
    if n < 4 {
        return domain(format!("enumerate needs n >= 4, got {n}"));
    }
    if k > n - 3 {
        return domain(format!("degree {k} exceeds n-3 = {}", n - 3));
    }
    Ok(enumerate_any(n, k, class))
}

/// An element of 𝖫(N): a binary bracketing of `1..=N` in which every bracket
/// has its smallest index on the left and its largest on the right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bracketing {
    Leaf(usize),
    Node(Box<Bracketing>, Box<Bracketing>),
}

impl Bracketing {
    pub fn node(a: Bracketing, b: Bracketing) -> Bracketing {
        Bracketing::Node(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<usize> {
        match self {
            Bracketing::Leaf(i) => vec![*i],
            Bracketing::Node(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn min_index(&self) -> usize {
        self.leaves().into_iter().min().unwrap()
    }

    pub fn max_index(&self) -> usize {
        self.leaves().into_iter().max().unwrap()
    }

    /// Number of indices.
    pub fn size(&self) -> usize {
        match self {
            Bracketing::Leaf(_) => 1,
            Bracketing::Node(a, b) => a.size() + b.size(),
        }
    }

    fn connected(&self) -> bool {
        let mut l = self.leaves();
        l.sort_unstable();
        l.windows(2).all(|w| w[1] == w[0] + 1)
    }

    /// Membership in 𝖫(N): each of `1..=N` once, min on the left and max on
    /// the right in every bracket.
    pub fn is_valid(&self) -> bool {
        let mut l = self.leaves();
        l.sort_unstable();
        if l != (1..=l.len()).collect::<Vec<_>>() {
            return false;
        }
        fn ordered(b: &Bracketing) -> bool {
            match b {
                Bracketing::Leaf(_) => true,
                Bracketing::Node(x, y) => {
                    let (lx, ly) = (x.leaves(), y.leaves());
                    let mn = lx.iter().chain(&ly).min().unwrap();
                    let mx = lx.iter().chain(&ly).max().unwrap();
                    lx.contains(mn) && ly.contains(mx) && ordered(x) && ordered(y)
                }
            }
        }
        ordered(self)
    }

    /// Brackets in pre-order: outside in, left to right.
    fn brackets_preorder<'a>(&'a self, out: &mut Vec<&'a Bracketing>) {
        if let Bracketing::Node(a, b) = self {
            out.push(self);
            a.brackets_preorder(out);
            b.brackets_preorder(out);
        }
    }

    /// A valid bracketing in which only the outermost bracket is connected.
    pub fn is_prime(&self) -> bool {
        if !self.is_valid() {
            return false;
        }
        let mut bs = Vec::new();
        self.brackets_preorder(&mut bs);
        bs.iter().skip(1).all(|b| !b.connected())
    }

    /// The chords of the associated diagram, in bracket order, as
    /// `(i - 1, j)` pairs (`0` read as `n`).
    pub fn chord_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.size() + 1;
        let mut bs = Vec::new();
        self.brackets_preorder(&mut bs);
        bs.iter()
            .skip(1)
            .map(|b| {
                let i = b.min_index();
                (if i == 1 { n } else { i - 1 }, b.max_index())
            })
            .collect()
    }
}

impl fmt::Display for Bracketing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bracketing::Leaf(i) => write!(f, "{i}"),
            Bracketing::Node(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

impl std::str::FromStr for Bracketing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let b = parse_bracketing(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("trailing input in bracketing {s:?}")));
        }
        Ok(b)
    }
}

fn parse_bracketing(c: &[char], pos: &mut usize) -> Result<Bracketing> {
    let at = *pos;
    let err = || Error::Parse(format!("malformed bracketing near position {at}"));
    match c.get(*pos) {
        Some('[') => {
            *pos += 1;
            let a = parse_bracketing(c, pos)?;
            if c.get(*pos) != Some(&',') {
                return Err(err());
            }
            *pos += 1;
            let b = parse_bracketing(c, pos)?;
            if c.get(*pos) != Some(&']') {
                return Err(err());
            }
            *pos += 1;
            Ok(Bracketing::node(a, b))
        }
        Some(d) if d.is_ascii_digit() => {
            let start = *pos;
            while c.get(*pos).is_some_and(|d| d.is_ascii_digit()) {
                *pos += 1;
            }
            let s: String = c[start..*pos].iter().collect();
            Ok(Bracketing::Leaf(s.parse().map_err(|_| err())?))
        }
        _ => Err(err()),
    }
}

/// A prime bracketing of `1..=N`, the combinatorial label of a prime
/// diagram on the (N+1)-gon.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeBracketing(Bracketing);

impl PrimeBracketing {
    pub fn new(b: Bracketing) -> Result<PrimeBracketing> {
        if !b.is_prime() {
            return domain(format!("{b} is not a prime bracketing"));
        }
        Ok(PrimeBracketing(b))
    }

    pub fn word(&self) -> &Bracketing {
        &self.0
    }

    /// Polygon size of the associated diagram.
    pub fn n(&self) -> usize {
        self.0.size() + 1
    }

    /// The chords in bracket order.
    pub fn chords_in_order(&self) -> Vec<Chord> {
        let n = self.n();
        self.0
            .chord_pairs()
            .into_iter()
            .map(|(i, j)| Chord::new(n, i, j).expect("prime brackets give chords"))
            .collect()
    }
}

impl fmt::Display for PrimeBracketing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::str::FromStr for PrimeBracketing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        PrimeBracketing::new(s.parse()?)
    }
}

/// The diagram of a prime bracketing, as a canonical monomial whose sign
/// records the bracket order of the chords.
pub fn bracketing_to_diagram(p: &PrimeBracketing) -> ChordMonomial {
    canonicalize(p.n(), &p.chords_in_order()).expect("distinct brackets give distinct chords")
}

/// All of 𝖫(N).
pub fn bracketings(n_indices: usize) -> Vec<Bracketing> {
    let set: Vec<usize> = (1..=n_indices).collect();
    bracketings_of(&set)
}

fn bracketings_of(set: &[usize]) -> Vec<Bracketing> {
    if set.len() == 1 {
        return vec![Bracketing::Leaf(set[0])];
    }
    let (first, last) = (set[0], set[set.len() - 1]);
    let middle = &set[1..set.len() - 1];
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << middle.len()) {
        let mut left = vec![first];
        let mut right = Vec::new();
        for (b, &x) in middle.iter().enumerate() {
            if mask >> b & 1 == 1 {
                left.push(x);
            } else {
                right.push(x);
            }
        }
        right.push(last);
        let ls = bracketings_of(&left);
        let rs = bracketings_of(&right);
        for l in &ls {
            for r in &rs {
                out.push(Bracketing::node(l.clone(), r.clone()));
            }
        }
    }
    out
}

/// The prime bracketings of `1..=N`.
pub fn prime_bracketings(n_indices: usize) -> Vec<PrimeBracketing> {
    bracketings(n_indices).into_iter().filter(|b| b.is_prime()).map(PrimeBracketing).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(n: usize, i: usize, j: usize) -> Chord {
        Chord::new(n, i, j).unwrap()
    }

    #[test]
    fn chord_counts() {
        for n in 4..10 {
            assert_eq!(chords(n).unwrap().len(), n * (n - 3) / 2);
        }
        assert_eq!(chords(4).unwrap(), vec![ch(4, 1, 3), ch(4, 2, 4)]);
        assert!(chords(3).is_err());
        assert!(Chord::new(5, 1, 5).is_err());
        assert!(Chord::new(5, 2, 3).is_err());
    }

    #[test]
    fn crossing_examples() {
        assert!(crosses(&ch(5, 1, 3), &ch(5, 2, 4)).unwrap());
        assert!(!crosses(&ch(6, 1, 3), &ch(6, 1, 4)).unwrap());
        assert!(crosses(&ch(8, 2, 5), &ch(8, 4, 7)).unwrap());
        assert!(crosses(&ch(5, 1, 3), &ch(6, 2, 4)).is_err());
    }

    #[test]
    fn perp_examples() {
        assert_eq!(perp(&BTreeSet::new(), 5).len(), 5);
        let a = BTreeSet::from([ch(5, 1, 3)]);
        assert_eq!(perp(&a, 5), BTreeSet::from([ch(5, 2, 4), ch(5, 2, 5)]));
        assert_eq!(perp(&perp(&a, 5), 5), a);
    }

    #[test]
    fn pentagon_pairs() {
        let pairs = complete_crossing_pairs(5).unwrap();
        assert_eq!(pairs.len(), 5);
        let square = complete_crossing_pairs(4).unwrap();
        assert_eq!(square, vec![(BTreeSet::from([ch(4, 1, 3)]), BTreeSet::from([ch(4, 2, 4)]))]);
    }

    #[test]
    fn canonical_signs() {
        let m = canonicalize(5, &[ch(5, 5, 3), ch(5, 1, 4)]).unwrap();
        assert_eq!(m.chords, vec![ch(5, 1, 4), ch(5, 3, 5)]);
        assert_eq!(m.sign, -1);
        assert!(canonicalize(5, &[ch(5, 1, 3), ch(5, 1, 3)]).is_none());
        assert_eq!(canonicalize(5, &[]).unwrap(), ChordMonomial::unit(5));
    }

    #[test]
    fn heptagon_split() {
        let m = ChordMonomial::from_pairs(7, &[(1, 3), (2, 7), (3, 5)]).unwrap().unwrap();
        let (l, r) = cocompose(&m, &ch(7, 3, 6)).unwrap().unwrap();
        assert_eq!(l.n, 5);
        assert_eq!(l.chords, vec![ch(5, 1, 3), ch(5, 2, 5)]);
        assert_eq!(r.n, 4);
        assert_eq!(r.chords, vec![ch(4, 1, 3)]);
        // chords in m's order: {1,3} {2,7} {3,5}; left gets the first two, no shuffle
        assert_eq!(l.sign * r.sign, 1);
        assert!(cocompose(&m, &ch(7, 2, 4)).unwrap().is_none());
        let e = ChordMonomial::unit(7);
        let (l, r) = cocompose(&e, &ch(7, 2, 5)).unwrap().unwrap();
        assert_eq!((l.n, r.n, l.degree(), r.degree()), (5, 4, 0, 0));
    }

    #[test]
    fn heptagon_residue() {
        let m = ChordMonomial::from_pairs(7, &[(1, 3), (2, 7), (3, 5)]).unwrap().unwrap();
        let (l, r) = residue_diagram(&m, &ch(7, 3, 5)).unwrap();
        assert_eq!(l.n, 6);
        assert_eq!(l.chords, vec![ch(6, 1, 3), ch(6, 2, 6)]);
        assert_eq!((r.n, r.degree()), (3, 0));
        assert_eq!(l.sign * r.sign, 1);
        assert!(residue_diagram(&m, &ch(7, 4, 6)).is_none());
        assert!(residue_diagram(&m, &ch(7, 1, 3)).is_none());
    }

    #[test]
    fn gravity_and_prime_examples() {
        let a = ChordMonomial::from_pairs(8, &[(2, 5), (4, 7)]).unwrap().unwrap();
        assert!(!is_gravity(&a));
        let b = ChordMonomial::from_pairs(8, &[(1, 5), (3, 7), (3, 5)]).unwrap().unwrap();
        assert!(!is_gravity(&b));
        let p = ChordMonomial::from_pairs(5, &[(5, 3), (1, 4)]).unwrap().unwrap();
        assert!(is_gravity(&p) && is_prime(&p));
        let h = ChordMonomial::from_pairs(6, &[(6, 4), (6, 3), (1, 5)]).unwrap().unwrap();
        assert!(is_prime(&h));
        let r = ChordMonomial::from_pairs(7, &[(1, 3), (2, 7), (3, 5)]).unwrap().unwrap();
        assert!(!is_prime(&r));
    }

    #[test]
    fn prime_counts() {
        assert_eq!(enumerate(5, 2, DiagramClass::Prime).unwrap().len(), 1);
        assert_eq!(enumerate(6, 3, DiagramClass::Prime).unwrap().len(), 4);
        assert_eq!(enumerate(4, 1, DiagramClass::Prime).unwrap().len(), 0);
        assert!(enumerate(5, 3, DiagramClass::All).is_err());
    }

    #[test]
    fn bracketing_examples() {
        let p: PrimeBracketing = "[[[1,3],4],[2,5]]".parse().unwrap();
        assert_eq!(p.chord_pairs_for_test(), vec![(6, 4), (6, 3), (1, 5)]);
        let q: PrimeBracketing = "[[1,3],[2,4]]".parse().unwrap();
        assert_eq!(q.chord_pairs_for_test(), vec![(5, 3), (1, 4)]);
        let r: PrimeBracketing = "[[1,4],[2,[3,5]]]".parse().unwrap();
        assert_eq!(r.chord_pairs_for_test(), vec![(6, 4), (1, 5), (2, 5)]);
        assert!("[[1,2],[3,4]]".parse::<PrimeBracketing>().is_err());
        assert!(!"[2,[1,3]]".parse::<Bracketing>().unwrap().is_valid());
        assert_eq!(bracketings(3).len(), 2);
        assert_eq!(prime_bracketings(5).len(), 4);
    }

    impl PrimeBracketing {
        fn chord_pairs_for_test(&self) -> Vec<(usize, usize)> {
            self.0.chord_pairs()
        }
    }

    #[test]
    fn tesselation_sizes() {
        assert_eq!(tesselations(4).len(), 3);
        assert_eq!(tesselations(5).len(), 11);
        assert_eq!(tesselations(6).len(), 45);
        let t = Tesselation::new(7, BTreeSet::from([ch(7, 3, 6), ch(7, 1, 3)])).unwrap();
        assert_eq!(t.polygon_sizes(), vec![3, 4, 4]);
        assert!(Tesselation::new(5, BTreeSet::from([ch(5, 1, 3), ch(5, 2, 4)])).is_err());
    }
}
