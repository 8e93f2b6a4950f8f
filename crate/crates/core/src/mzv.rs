//! Multiple zeta values: words, formal polynomial expressions with rational
//! coefficients, a relation table reducing low-weight products to a basis,
//! high-precision evaluation, and fitting of numbers to basis combinations.
//!
//! Convention: `ζ(k₁,…,k_r) = Σ_{0<n₁<…<n_r} 1/(n₁^{k₁}⋯n_r^{k_r})` with
//! `k_r ≥ 2`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Q;

/// Largest number of decimal digits [`mzv_value`] will produce.
pub const MAX_DIGITS: u32 = 30;

/// Default number of digits for evaluation.
pub const DEFAULT_DIGITS: u32 = 15;

/// Environment variable naming a relation table to load instead of the
/// built-in one.
pub const TABLE_ENV: &str = "EXOTIC_BV_MZV_TABLE";

const GUARD: u32 = 10;

/// A multiple zeta value index `(k₁,…,k_r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MZVWord {
    exponents: Vec<u32>,
}

impl MZVWord {
    pub fn new(exponents: Vec<u32>) -> Result<MZVWord> {
        match exponents.last() {
            None => Err(Error::Domain("empty MZV index".into())),
            Some(&last) if last < 2 => Err(Error::Domain(format!("divergent MZV index {exponents:?}"))),
            _ if exponents.contains(&0) => Err(Error::Domain(format!("MZV exponents must be positive: {exponents:?}"))),
            _ => Ok(MZVWord { exponents }),
        }
    }

    /// The single zeta value `ζ(k)`.
    pub fn zeta(k: u32) -> Result<MZVWord> {
        MZVWord::new(vec![k])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn weight(&self) -> usize {
        self.exponents.iter().map(|&k| k as usize).sum()
    }

    pub fn depth(&self) -> usize {
        self.exponents.len()
    }

    /// The iterated-integral word from 0 to 1 in letters `ω₁ = dt/(1-t)`
    /// (`true`) and `ω₀ = dt/t` (`false`), innermost letter first.
    fn letters(&self) -> Vec<bool> {
        let mut w = Vec::with_capacity(self.weight());
        for &k in &self.exponents {
            w.push(true);
            w.extend(std::iter::repeat_n(false, k as usize - 1));
        }
        w
    }
}

impl fmt::Display for MZVWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exponents.iter().map(|k| k.to_string()).collect();
        write!(f, "zeta({})", parts.join(","))
    }
}

impl FromStr for MZVWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = ["zeta(", "z(", "ζ("]
            .iter()
            .find_map(|p| s.strip_prefix(p))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("expected zeta(...), got {s:?}")))?;
        let exps = body
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("bad MZV exponent in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        MZVWord::new(exps)
    }
}

/// A commutative monomial in MZV words, kept sorted. The empty monomial is 1.
pub type Monomial = Vec<MZVWord>;

fn monomial_weight(m: &Monomial) -> usize {
    m.iter().map(MZVWord::weight).sum()
}

fn monomial_to_string(m: &Monomial) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("*")
}

fn parse_monomial(s: &str) -> Result<Monomial> {
    let s = s.trim();
    if s == "1" {
        return Ok(Vec::new());
    }
    let mut m = s.split('*').map(|x| x.parse::<MZVWord>()).collect::<Result<Vec<_>>>()?;
    m.sort();
    Ok(m)
}

/// A rational linear combination of MZV monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MZVExpr {
    terms: BTreeMap<Monomial, Q>,
}

impl MZVExpr {
    pub fn zero() -> MZVExpr {
        MZVExpr::default()
    }

    pub fn one() -> MZVExpr {
        MZVExpr::constant(Q::one())
    }

    pub fn constant(q: Q) -> MZVExpr {
        let mut e = MZVExpr::zero();
        e.add_term(Vec::new(), q);
        e
    }

    pub fn word(w: MZVWord) -> MZVExpr {
        let mut e = MZVExpr::zero();
        e.add_term(vec![w], Q::one());
        e
    }

    /// `ζ(k)` as an expression.
    pub fn zeta(k: u32) -> Result<MZVExpr> {
        Ok(MZVExpr::word(MZVWord::zeta(k)?))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, mut m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        m.sort();
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &MZVExpr) -> MZVExpr {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> MZVExpr {
        let mut out = MZVExpr::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    /// Product of formal monomials without any reduction.
    pub fn mul_formal(&self, other: &MZVExpr) -> MZVExpr {
        let mut out = MZVExpr::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut m = a.clone();
                m.extend(b.iter().cloned());
                out.add_term(m, x * y);
            }
        }
        out
    }

    /// The common weight of all terms; `None` if the expression mixes
    /// weights. The zero expression has weight 0.
    pub fn weight(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(monomial_weight);
        let w = it.next().unwrap_or(0);
        it.all(|x| x == w).then_some(w)
    }

    /// The constant term.
    pub fn constant_term(&self) -> Q {
        self.terms.get(&Vec::new()).cloned().unwrap_or_else(Q::zero)
    }
}

impl fmt::Display for MZVExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            if m.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", monomial_to_string(m))?;
            } else {
                write!(f, "{abs}*{}", monomial_to_string(m))?;
            }
        }
        Ok(())
    }
}

impl FromStr for MZVExpr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut out = MZVExpr::zero();
        if compact == "0" {
            return Ok(out);
        }
        let mut pieces = Vec::new();
        let mut depth = 0i32;
        let mut cur = String::new();
        let mut neg = false;
        for ch in compact.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
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
        if pieces.is_empty() {
            return Err(Error::Parse(format!("empty MZV expression {s:?}")));
        }
        for (neg, body) in pieces {
            let mut coef = Q::one();
            let mut words = Vec::new();
            for factor in body.split('*') {
                if factor.starts_with(|c: char| c.is_ascii_digit()) {
                    coef *= factor.parse::<Q>().map_err(|_| Error::Parse(format!("bad coefficient {factor:?}")))?;
                } else {
                    words.push(factor.parse::<MZVWord>()?);
                }
            }
            out.add_term(words, if neg { -coef } else { coef });
        }
        Ok(out)
    }
}

impl Serialize for MZVExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MZVExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A decimal fixed-point number `mantissa / 10^scale`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    mantissa: BigInt,
    scale: u32,
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

impl Real {
    pub fn zero(scale: u32) -> Real {
        Real { mantissa: BigInt::zero(), scale }
    }

    pub fn from_rational(q: &Q, scale: u32) -> Real {
        let n = q.numer() * pow10(scale);
        Real { mantissa: n.div_floor(q.denom()), scale }
    }

    pub fn add(&self, other: &Real) -> Real {
        debug_assert_eq!(self.scale, other.scale);
        Real { mantissa: &self.mantissa + &other.mantissa, scale: self.scale }
    }

    pub fn mul(&self, other: &Real) -> Real {
        debug_assert_eq!(self.scale, other.scale);
        Real { mantissa: (&self.mantissa * &other.mantissa) / pow10(self.scale), scale: self.scale }
    }

    pub fn to_f64(&self) -> f64 {
        Q::new(self.mantissa.clone(), pow10(self.scale)).to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with `digits` digits after the point (truncated).
    pub fn to_decimal(&self, digits: u32) -> String {
        let digits = digits.min(self.scale);
        let m = &self.mantissa / pow10(self.scale - digits);
        let neg = m.is_negative();
        let s = m.abs().to_string();
        let s = format!("{:0>width$}", s, width = digits as usize + 1);
        let (int, frac) = s.split_at(s.len() - digits as usize);
        format!("{}{int}.{frac}", if neg { "-" } else { "" })
    }
}

/// `Li_{m₁,…,m_p}(½) = Σ_{n₁<…<n_p} 2^{-n_p} / (n₁^{m₁}⋯n_p^{m_p})` in
/// fixed point with `scale` digits; the tail is geometric.
fn polylog_half(m: &[usize], scale: u32) -> BigInt {
    let one = pow10(scale);
    let p = m.len();
    if p == 0 {
        return one;
    }
    let mut partial = vec![BigInt::zero(); p];
    partial[0] = one.clone();
    let mut total = BigInt::zero();
    let mut two_pow = BigInt::one();
    let mut n: usize = 0;
    loop {
        n += 1;
        two_pow <<= 1;
        let nb = BigInt::from(n);
        let outer = &partial[p - 1] / (num_traits::pow(nb.clone(), m[p - 1]) * &two_pow);
        total += &outer;
        for i in (1..p).rev() {
            let inc = &partial[i - 1] / num_traits::pow(nb.clone(), m[i - 1]);
            partial[i] += inc;
        }
        // Remaining terms are bounded by partial · (n+1)^p · 2^{-n}.
        if n > 8 && (&partial[p - 1] * BigInt::from((n + 1).pow(p as u32))) >> n == BigInt::zero() {
            break;
        }
    }
    total
}

/// `I(0; w; ½)` for a word starting with `ω₁`, as a polylog at ½.
fn iterated_half(letters: &[bool], scale: u32) -> BigInt {
    if letters.is_empty() {
        return pow10(scale);
    }
    debug_assert!(letters[0]);
    let mut exps = Vec::new();
    for &l in letters {
        if l {
            exps.push(1);
        } else {
            *exps.last_mut().expect("word starts with ω₁") += 1;
        }
    }
    polylog_half(&exps, scale)
}

/// Numerical value of an MZV with `digits` correct decimal digits.
///
/// The iterated integral over `[0,1]` is split at ½; the piece over
/// `[½,1]` becomes an integral over `[0,½]` under `t ↦ 1-t`, and both pieces
/// are multiple polylogarithms at ½.
pub fn mzv_value(w: &MZVWord, digits: u32) -> Result<Real> {
    if digits > MAX_DIGITS {
        return Err(Error::Precision(format!("{digits} digits requested, at most {MAX_DIGITS} supported")));
    }
    let scale = digits + GUARD;
    let word = w.letters();
    let one = pow10(scale);
    let mut total = BigInt::zero();
    for j in 0..=word.len() {
        let prefix = &word[..j];
        let suffix: Vec<bool> = word[j..].iter().rev().map(|l| !l).collect();
        total += iterated_half(prefix, scale) * iterated_half(&suffix, scale) / &one;
    }
    Ok(Real { mantissa: total, scale })
}

static F64_CACHE: Lazy<Mutex<HashMap<MZVWord, f64>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Double-precision value of an MZV, cached.
pub fn mzv_f64(w: &MZVWord) -> f64 {
    if let Some(v) = F64_CACHE.lock().expect("cache poisoned").get(w) {
        return *v;
    }
    let v = mzv_value(w, 20).expect("20 digits is within range").to_f64();
    F64_CACHE.lock().expect("cache poisoned").insert(w.clone(), v);
    v
}

/// Numerical value of an expression.
pub fn evaluate(e: &MZVExpr, digits: u32) -> Result<Real> {
    if digits > MAX_DIGITS {
        return Err(Error::Precision(format!("{digits} digits requested, at most {MAX_DIGITS} supported")));
    }
    let scale = digits + GUARD;
    let mut total = Real::zero(scale);
    for (m, c) in &e.terms {
        let mut v = Real::from_rational(c, scale);
        for w in m {
            v = v.mul(&mzv_value(w, digits)?);
        }
        total = total.add(&v);
    }
    Ok(total)
}

/// Double-precision value of an expression.
pub fn evaluate_f64(e: &MZVExpr) -> f64 {
    e.terms.iter().map(|(m, c)| c.to_f64().unwrap_or(f64::NAN) * m.iter().map(mzv_f64).product::<f64>()).sum()
}

#[derive(Deserialize)]
struct RawTable {
    max_weight: usize,
    basis: BTreeMap<String, Vec<String>>,
    relations: Vec<RawRelation>,
}

#[derive(Deserialize)]
struct RawRelation {
    weight: usize,
    monomial: String,
    value: Vec<(String, String)>,
}

/// Relations expressing monomials of weight at most `max_weight` in a
/// weight-graded basis.
#[derive(Clone, Debug)]
pub struct RelationTable {
    pub max_weight: usize,
    basis: BTreeMap<usize, Vec<Monomial>>,
    relations: BTreeMap<Monomial, MZVExpr>,
}

const BUILTIN_TABLE: &str = include_str!("../data/mzv_table.json");

static DEFAULT_TABLE: Lazy<RelationTable> =
    Lazy::new(|| RelationTable::from_json(BUILTIN_TABLE).expect("built-in MZV table is well formed"));

impl RelationTable {
    /// The built-in table (weights up to 4).
    pub fn builtin() -> &'static RelationTable {
        &DEFAULT_TABLE
    }

    /// The table named by the environment variable, or the built-in one.
    pub fn from_env() -> Result<RelationTable> {
        match std::env::var_os(TABLE_ENV) {
            Some(p) => RelationTable::load(Path::new(&p)),
            None => Ok(DEFAULT_TABLE.clone()),
        }
    }

    pub fn load(path: &Path) -> Result<RelationTable> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RelationTable::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<RelationTable> {
        let raw: RawTable = serde_json::from_str(text).map_err(|e| Error::Parse(format!("MZV table: {e}")))?;
        let mut basis = BTreeMap::new();
        for (w, list) in raw.basis {
            let w: usize = w.parse().map_err(|_| Error::Parse(format!("bad basis weight {w:?}")))?;
            let ms = list.iter().map(|s| parse_monomial(s)).collect::<Result<Vec<_>>>()?;
            if let Some(bad) = ms.iter().find(|m| monomial_weight(m) != w) {
                return Err(Error::Parse(format!("basis element {} is not of weight {w}", monomial_to_string(bad))));
            }
            basis.insert(w, ms);
        }
        let mut relations = BTreeMap::new();
        for r in raw.relations {
            let m = parse_monomial(&r.monomial)?;
            if monomial_weight(&m) != r.weight {
                return Err(Error::Parse(format!("relation for {} has wrong weight {}", r.monomial, r.weight)));
            }
            let mut value = MZVExpr::zero();
            for (c, b) in &r.value {
                let c: Q = c.parse().map_err(|_| Error::Parse(format!("bad coefficient {c:?}")))?;
                let b = parse_monomial(b)?;
                if !basis.get(&r.weight).is_some_and(|v: &Vec<Monomial>| v.contains(&b)) {
                    return Err(Error::Parse(format!(
                        "{} is not a basis element of weight {}",
                        monomial_to_string(&b),
                        r.weight
                    )));
                }
                value.add_term(b, c);
            }
            relations.insert(m, value);
        }
        Ok(RelationTable { max_weight: raw.max_weight, basis, relations })
    }

    /// Basis monomials of the given weight (empty if the weight is not
    /// covered or has no elements).
    pub fn basis(&self, weight: usize) -> &[Monomial] {
        self.basis.get(&weight).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The relations as pairs (monomial, value).
    pub fn relations(&self) -> impl Iterator<Item = (MZVExpr, &MZVExpr)> {
        self.relations.iter().map(|(m, v)| {
            let mut e = MZVExpr::zero();
            e.add_term(m.clone(), Q::one());
            (e, v)
        })
    }

    /// Residuals `|value(lhs) - value(rhs)|` for every relation.
    pub fn validate(&self, digits: u32) -> Result<Vec<(String, f64)>> {
        let mut out = Vec::new();
        for (lhs, rhs) in self.relations() {
            let diff = lhs.add(&rhs.scale(&-Q::one()));
            out.push((format!("{lhs} = {rhs}"), evaluate(&diff, digits)?.to_f64().abs()));
        }
        Ok(out)
    }

    fn is_basis(&self, m: &Monomial) -> bool {
        self.basis(monomial_weight(m)).contains(m)
    }

    fn reduce_monomial(&self, m: &Monomial) -> MZVExpr {
        let mut single = MZVExpr::zero();
        single.add_term(m.clone(), Q::one());
        if monomial_weight(m) > self.max_weight || self.is_basis(m) {
            return single;
        }
        if let Some(v) = self.relations.get(m) {
            return v.clone();
        }
        if m.len() < 2 {
            return single;
        }
        let mut prod = MZVExpr::one();
        for w in m {
            prod = prod.mul_formal(&self.reduce_monomial(&vec![w.clone()]));
        }
        let mut out = MZVExpr::zero();
        for (pm, c) in &prod.terms {
            let r = if pm == m {
                let mut e = MZVExpr::zero();
                e.add_term(pm.clone(), Q::one());
                e
            } else {
                self.reduce_monomial(pm)
            };
            out = out.add(&r.scale(c));
        }
        out
    }

    /// Rewrites every monomial of covered weight in the basis.
    pub fn reduce(&self, e: &MZVExpr) -> MZVExpr {
        let mut out = MZVExpr::zero();
        for (m, c) in &e.terms {
            out = out.add(&self.reduce_monomial(m).scale(c));
        }
        out
    }
}

/// Product of two expressions, reduced with the table where it applies.
pub fn mzv_mul(a: &MZVExpr, b: &MZVExpr, table: &RelationTable) -> MZVExpr {
    table.reduce(&a.mul_formal(b))
}

/// Searches for a rational combination of the weight-`weight` basis with
/// denominators at most `denom_bound` matching `x` within `tol`. Zero is
/// returned for `|x| < tol`.
pub fn fit_mzv(x: f64, weight: usize, tol: f64, denom_bound: u32, table: &RelationTable) -> Result<Option<MZVExpr>> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot fit non-finite value {x}")));
    }
    if x.abs() < tol {
        return Ok(Some(MZVExpr::zero()));
    }
    if weight > table.max_weight {
        return Err(Error::Domain(format!("weight {weight} exceeds the table's maximum {}", table.max_weight)));
    }
    let basis = table.basis(weight);
    let values: Vec<f64> = basis
        .iter()
        .map(|m| {
            let mut e = MZVExpr::zero();
            e.add_term(m.clone(), Q::one());
            evaluate_f64(&e)
        })
        .collect();
    let mut found: Vec<MZVExpr> = Vec::new();
    let mut consider = |coefs: Vec<Q>| {
        let mut e = MZVExpr::zero();
        for (m, c) in basis.iter().zip(coefs) {
            e.add_term(m.clone(), c);
        }
        if (evaluate_f64(&e) - x).abs() < tol && !found.contains(&e) {
            found.push(e);
        }
    };
    match values.len() {
        0 => return Err(Error::Domain(format!("the table has no basis in weight {weight}"))),
        1 => {
            for d in 1..=denom_bound as i64 {
                let num = (x * d as f64 / values[0]).round() as i64;
                consider(vec![Q::new(BigInt::from(num), BigInt::from(d))]);
            }
        }
        2 => {
            let bound = 4 * denom_bound as i64;
            for d in 1..=denom_bound as i64 {
                for a in -bound..=bound {
                    let first = a as f64 / d as f64;
                    let b = ((x - first * values[0]) * d as f64 / values[1]).round() as i64;
                    consider(vec![Q::new(BigInt::from(a), BigInt::from(d)), Q::new(BigInt::from(b), BigInt::from(d))]);
                }
            }
        }
        k => return Err(Error::Domain(format!("fitting in a basis of dimension {k} is not supported"))),
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(Error::Ambiguous(format!(
            "{x} matches {} within {tol}",
            found.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" and ")
        ))),
    }
}
