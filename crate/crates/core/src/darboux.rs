//! The polynomial algebra `ℚ[qᵘ, p_μ]` of an odd symplectic vector space
//! in Darboux coordinates, its BV operator and bracket, and the
//! representation `Γ ↦ D_Γ` of graph monomials as polydifferential
//! operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exotic::{nu_chains, Coefficient, IdentityReport, PeriodMode, Realization, REPRESENTATION_NOTE};
use crate::graphs::{Gen, GraphChain, GraphMonomial};
use crate::mzv::RelationTable;
use crate::Q;

/// Coefficient rings for polynomials and operators: exact rationals or
/// floating point.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + FromPrimitive
    + ToPrimitive
    + 'static
{
    fn from_q(q: &Q) -> Self;
}

impl Coeff for Q {
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
}

impl Coeff for f64 {
    fn from_q(q: &Q) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

/// Largest supported number of conjugate pairs.
pub const MAX_PAIRS: usize = 4;

/// The variables `q¹, p₁, …, q^d, p_d` with their degrees; variable `2μ`
/// is `q^{μ+1}` and `2μ+1` is `p_{μ+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OddSymplecticContext {
    pub d: usize,
    q_degrees: Vec<i32>,
}

impl OddSymplecticContext {
    /// `d` pairs with `|q| = 0`, `|p| = 1`.
    pub fn new(d: usize) -> Result<Arc<OddSymplecticContext>> {
        Self::with_degrees(vec![0; d])
    }

    /// Pairs with the given degrees of `q^μ`; `|p_μ| = 1 - |q^μ|`.
    pub fn with_degrees(q_degrees: Vec<i32>) -> Result<Arc<OddSymplecticContext>> {
        let d = q_degrees.len();
        if d == 0 || d > MAX_PAIRS {
            return domain(format!("need between 1 and {MAX_PAIRS} conjugate pairs, got {d}"));
        }
        Ok(Arc::new(OddSymplecticContext { d, q_degrees }))
    }

    pub fn vars(&self) -> usize {
        2 * self.d
    }

    pub fn q(&self, mu: usize) -> usize {
        2 * mu
    }

    pub fn p(&self, mu: usize) -> usize {
        2 * mu + 1
    }

    pub fn degree(&self, v: usize) -> i32 {
        let q = self.q_degrees[v / 2];
        if v.is_multiple_of(2) {
            q
        } else {
            1 - q
        }
    }

    pub fn is_odd(&self, v: usize) -> bool {
        self.degree(v).rem_euclid(2) == 1
    }

    fn odd_mask(&self, m: Mono) -> u64 {
        (0..self.vars()).filter(|&v| self.is_odd(v) && exp(m, v) > 0).fold(0, |acc, v| acc | 1 << v)
    }

    fn mono_degree(&self, m: Mono) -> i32 {
        (0..self.vars()).map(|v| exp(m, v) as i32 * self.degree(v)).sum()
    }

    fn name(&self, v: usize) -> String {
        format!("{}{}", if v.is_multiple_of(2) { "q" } else { "p" }, v / 2 + 1)
    }
}

/// Exponents packed one byte per variable.
type Mono = u64;

fn exp(m: Mono, v: usize) -> u8 {
    (m >> (8 * v)) as u8
}

fn with_exp(m: Mono, v: usize, e: u8) -> Mono {
    (m & !(0xffu64 << (8 * v))) | (e as u64) << (8 * v)
}

/// Sign of moving the odd factors of `b` past those of `a`, or `None` if
/// they share an odd variable.
fn product_sign(a_odd: u64, b_odd: u64) -> Option<bool> {
    if a_odd & b_odd != 0 {
        return None;
    }
    let mut neg = false;
    let mut b = b_odd;
    while b != 0 {
        let y = b.trailing_zeros();
        neg ^= (a_odd >> y >> 1).count_ones() % 2 == 1;
        b &= b - 1;
    }
    Some(neg)
}

/// A polynomial in the graded-commutative algebra; odd factors are kept in
/// increasing variable order.
#[derive(Clone, PartialEq)]
pub struct GradedPoly<C: Coeff = Q> {
    ctx: Arc<OddSymplecticContext>,
    terms: BTreeMap<Mono, C>,
}

impl<C: Coeff> GradedPoly<C> {
    pub fn zero(ctx: &Arc<OddSymplecticContext>) -> Self {
        GradedPoly { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ctx: &Arc<OddSymplecticContext>, c: C) -> Self {
        let mut out = Self::zero(ctx);
        out.add_term(0, c);
        out
    }

    pub fn var(ctx: &Arc<OddSymplecticContext>, v: usize) -> Result<Self> {
        if v >= ctx.vars() {
            return domain(format!("variable {v} out of range"));
        }
        let mut out = Self::zero(ctx);
        out.add_term(with_exp(0, v, 1), C::one());
        Ok(out)
    }

    /// `q^μ`, 1-based.
    pub fn q(ctx: &Arc<OddSymplecticContext>, mu: usize) -> Result<Self> {
        if mu == 0 || mu > ctx.d {
            return domain(format!("no pair {mu}"));
        }
        Self::var(ctx, ctx.q(mu - 1))
    }

    /// `p_μ`, 1-based.
    pub fn p(ctx: &Arc<OddSymplecticContext>, mu: usize) -> Result<Self> {
        if mu == 0 || mu > ctx.d {
            return domain(format!("no pair {mu}"));
        }
        Self::var(ctx, ctx.p(mu - 1))
    }

    pub fn context(&self) -> &Arc<OddSymplecticContext> {
        &self.ctx
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

    /// Terms as (exponent vector, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<u8>, &C)> + '_ {
        self.terms.iter().map(|(m, c)| ((0..self.ctx.vars()).map(|v| exp(*m, v)).collect(), c))
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().unwrap_or(f64::INFINITY).abs()).fold(0.0, f64::max)
    }

    fn add_term(&mut self, m: Mono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx != other.ctx {
            return domain("polynomials live in different contexts");
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, s: &C) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.add_term(*m, c.clone() * s.clone());
        }
        out
    }

    /// The graded-commutative product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let ctx = &self.ctx;
        let mut out = Self::zero(ctx);
        let right: Vec<(Mono, u64, &C)> = other.terms.iter().map(|(m, c)| (*m, ctx.odd_mask(*m), c)).collect();
        for (ma, ca) in &self.terms {
            let oa = ctx.odd_mask(*ma);
            for (mb, ob, cb) in &right {
                if let Some(neg) = product_sign(oa, *ob) {
                    let c = ca.clone() * (*cb).clone();
                    out.add_term(ma + mb, if neg { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Degree of a homogeneous polynomial; zero counts as degree 0.
    pub fn homogeneous_degree(&self) -> Option<i32> {
        let mut degs = self.terms.keys().map(|m| self.ctx.mono_degree(*m));
        match degs.next() {
            None => Some(0),
            Some(d) => degs.all(|e| e == d).then_some(d),
        }
    }

    /// Decomposition into homogeneous components.
    pub fn homogeneous_parts(&self) -> BTreeMap<i32, Self> {
        let mut out: BTreeMap<i32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(self.ctx.mono_degree(*m)).or_insert_with(|| Self::zero(&self.ctx)).add_term(*m, c.clone());
        }
        out
    }

    /// The left derivative `∂/∂x_v`.
    pub fn derivative(&self, v: usize) -> Self {
        let ctx = &self.ctx;
        let odd = ctx.is_odd(v);
        let mut out = Self::zero(ctx);
        for (m, c) in &self.terms {
            let e = exp(*m, v);
            if e == 0 {
                continue;
            }
            let reduced = with_exp(*m, v, e - 1);
            if odd {
                let before = ctx.odd_mask(*m) & ((1u64 << v) - 1);
                let c = c.clone();
                out.add_term(reduced, if before.count_ones() % 2 == 1 { -c } else { c });
            } else {
                out.add_term(reduced, c.clone() * C::from_u8(e).expect("small integer"));
            }
        }
        out
    }

    /// Applies `∂_{a₁} ∘ … ∘ ∂_{a_r}` where `alpha` lists each variable
    /// with multiplicity in increasing order.
    fn derive_multi(&self, alpha: Mono) -> Self {
        let mut out = self.clone();
        for v in (0..self.ctx.vars()).rev() {
            for _ in 0..exp(alpha, v) {
                if out.is_zero() {
                    return out;
                }
                out = out.derivative(v);
            }
        }
        out
    }

    /// The BV operator `Δ = Σ_μ ∂/∂p_μ ∂/∂q^μ`.
    pub fn delta(&self) -> Self {
        let mut out = Self::zero(&self.ctx);
        for mu in 0..self.ctx.d {
            let t = self.derivative(self.ctx.q(mu)).derivative(self.ctx.p(mu));
            for (m, c) in t.terms {
                out.add_term(m, c);
            }
        }
        out
    }

    /// `{f, g} = Δ(fg) - Δ(f)g - (-1)^{|f|} fΔ(g)`, extended linearly over
    /// the homogeneous components of `f`.
    pub fn bracket(&self, g: &Self) -> Result<Self> {
        self.check(g)?;
        let mut out = Self::zero(&self.ctx);
        for (deg, f) in self.homogeneous_parts() {
            let mut t = f.mul(g)?.delta().sub(&f.delta().mul(g)?)?;
            let fdg = f.mul(&g.delta())?;
            t = if deg.rem_euclid(2) == 1 { t.add(&fdg)? } else { t.sub(&fdg)? };
            out = out.add(&t)?;
        }
        Ok(out)
    }

    /// Substitutes `images[v]` for variable `v`, an algebra homomorphism
    /// when each image has the parity of its variable.
    pub fn substitute(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.ctx.vars() {
            return domain("one image per variable is required");
        }
        let mut out = Self::zero(&self.ctx);
        for (m, c) in &self.terms {
            let mut t = Self::constant(&self.ctx, c.clone());
            for (v, img) in images.iter().enumerate() {
                for _ in 0..exp(*m, v) {
                    t = t.mul(img)?;
                }
            }
            out = out.add(&t)?;
        }
        Ok(out)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> GradedPoly<D> {
        let mut out = GradedPoly::zero(&self.ctx);
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }
}

impl GradedPoly<Q> {
    pub fn to_f64(&self) -> GradedPoly<f64> {
        self.map_coeffs(|c| c.to_f64().unwrap_or(f64::NAN))
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for GradedPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut factors = vec![format!("{c}")];
                for v in 0..self.ctx.vars() {
                    match exp(*m, v) {
                        0 => {}
                        1 => factors.push(self.ctx.name(v)),
                        e => factors.push(format!("{}^{e}", self.ctx.name(v))),
                    }
                }
                factors.join("*")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff + fmt::Display> fmt::Debug for GradedPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A random homogeneous polynomial with up to `max_terms` terms, exponents
/// of even variables at most 3 and nonzero coefficients in `-3..=3`.
pub fn random_poly(ctx: &Arc<OddSymplecticContext>, rng: &mut impl Rng, max_terms: usize) -> GradedPoly<Q> {
    random_poly_sparse(ctx, rng, max_terms, 0.5)
}

/// Like [`random_poly`], with each odd variable present with probability
/// `odd_rate`. Products of many inputs vanish less often when it is small.
pub fn random_poly_sparse(
    ctx: &Arc<OddSymplecticContext>,
    rng: &mut impl Rng,
    max_terms: usize,
    odd_rate: f64,
) -> GradedPoly<Q> {
    let mut raw = GradedPoly::zero(ctx);
    let mut target = None;
    for _ in 0..rng.gen_range(1..=max_terms.max(1)) {
        let mut m = 0;
        for v in 0..ctx.vars() {
            let e = if ctx.is_odd(v) { u8::from(rng.gen_bool(odd_rate)) } else { rng.gen_range(0..=3) };
            m = with_exp(m, v, e);
        }
        let deg = ctx.mono_degree(m);
        if *target.get_or_insert(deg) != deg {
            continue;
        }
        let c: i64 = [-3, -2, -1, 1, 2, 3][rng.gen_range(0..6)];
        raw.add_term(m, Q::from_integer(c.into()));
    }
    raw
}

/// The left derivative of a tensor slot: slot, variable.
type SlotOp = (usize, usize);

/// The derivative words of one generator acting on `n - 1` slots, as
/// composites `∂_first ∘ ∂_second`.
fn generator_ops(ctx: &OddSymplecticContext, g: Gen) -> Vec<[SlotOp; 2]> {
    let mut out = Vec::new();
    for mu in 0..ctx.d {
        let (q, p) = (ctx.q(mu), ctx.p(mu));
        match g {
            Gen::S(k) => out.push([(k, p), (k, q)]),
            Gen::B(i, j) => {
                out.push([(i, p), (j, q)]);
                out.push([(j, p), (i, q)]);
            }
        }
    }
    out
}

/// A polydifferential operator `O^{⊗N} → O`, stored as a sum over
/// per-slot derivative multi-indices followed by the product.
#[derive(Clone, Debug)]
pub struct DiffOperator<C: Coeff = Q> {
    ctx: Arc<OddSymplecticContext>,
    pub arity: usize,
    terms: HashMap<Vec<Mono>, C>,
}

impl<C: Coeff> DiffOperator<C> {
    pub fn zero(ctx: &Arc<OddSymplecticContext>, arity: usize) -> Self {
        DiffOperator { ctx: ctx.clone(), arity, terms: HashMap::new() }
    }

    /// `D_Γ = m ∘ D_{e₁} ∘ … ∘ D_{e_k}` for the monomial `Γ = e₁ ⋯ e_k`.
    pub fn from_graph(ctx: &Arc<OddSymplecticContext>, g: &GraphMonomial) -> Self {
        let mut out = Self::zero(ctx, g.n - 1);
        out.add_graph(g, C::one());
        out
    }

    /// The operator of a chain, coefficients converted from `ℚ`.
    pub fn from_chain(ctx: &Arc<OddSymplecticContext>, x: &GraphChain) -> Self {
        let mut out = Self::zero(ctx, x.n - 1);
        for (m, c) in x.terms() {
            out.add_graph(&m, C::from_q(c));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_graph(&mut self, g: &GraphMonomial, coef: C) {
        let ctx = self.ctx.clone();
        let coef = if g.sign < 0 { -coef } else { coef };
        let choices: Vec<Vec<[SlotOp; 2]>> = g.gens.iter().map(|x| generator_ops(&ctx, *x)).collect();
        let mut idx = vec![0usize; choices.len()];
        let mut word: Vec<SlotOp> = Vec::with_capacity(2 * choices.len());
        loop {
            word.clear();
            for (c, &i) in choices.iter().zip(&idx) {
                word.extend_from_slice(&c[i]);
            }
            if let Some((key, neg)) = self.canonical(&mut word) {
                let c = if neg { -coef.clone() } else { coef.clone() };
                let e = self.terms.entry(key).or_insert_with(C::zero);
                *e = e.clone() + c;
            }
            let mut p = idx.len();
            loop {
                if p == 0 {
                    self.terms.retain(|_, c| !c.is_zero());
                    return;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < choices[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    /// Sorts a composite of derivatives by (slot, variable) using graded
    /// commutativity; `None` if an odd derivative repeats.
    fn canonical(&self, word: &mut [SlotOp]) -> Option<(Vec<Mono>, bool)> {
        let ctx = &self.ctx;
        let mut neg = false;
        for i in 1..word.len() {
            let mut j = i;
            while j > 0 && word[j - 1] > word[j] {
                if ctx.is_odd(word[j - 1].1) && ctx.is_odd(word[j].1) {
                    neg = !neg;
                }
                word.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut key = vec![0 as Mono; self.arity];
        for (i, &(slot, v)) in word.iter().enumerate() {
            if i > 0 && word[i - 1] == (slot, v) && ctx.is_odd(v) {
                return None;
            }
            let k = &mut key[slot - 1];
            *k = with_exp(*k, v, exp(*k, v) + 1);
        }
        Some((key, neg))
    }

    /// Evaluates the operator on a tuple of inputs.
    pub fn apply(&self, inputs: &[GradedPoly<C>]) -> Result<GradedPoly<C>> {
        if inputs.len() != self.arity {
            return domain(format!("operator of arity {} applied to {} inputs", self.arity, inputs.len()));
        }
        if inputs.iter().any(|x| *x.context() != self.ctx) {
            return domain("inputs live in a different context");
        }
        let parts: Vec<Vec<(i32, GradedPoly<C>)>> =
            inputs.iter().map(|x| x.homogeneous_parts().into_iter().collect()).collect();
        let mut out = GradedPoly::zero(&self.ctx);
        if parts.iter().any(|p| p.is_empty()) {
            return Ok(out);
        }
        let mut idx = vec![0usize; parts.len()];
        loop {
            let chosen: Vec<&(i32, GradedPoly<C>)> = parts.iter().zip(&idx).map(|(p, &i)| &p[i]).collect();
            out = out.add(&self.apply_homogeneous(&chosen)?)?;
            let mut p = idx.len();
            loop {
                if p == 0 {
                    return Ok(out);
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < parts[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    fn apply_homogeneous(&self, inputs: &[&(i32, GradedPoly<C>)]) -> Result<GradedPoly<C>> {
        let ctx = &self.ctx;
        let mut memo: Vec<HashMap<Mono, GradedPoly<C>>> = vec![HashMap::new(); inputs.len()];
        let mut out = GradedPoly::zero(ctx);
        if inputs.is_empty() {
            for c in self.terms.values() {
                out.add_term(0, c.clone());
            }
            return Ok(out);
        }
        let mut keys: Vec<&Vec<Mono>> = self.terms.keys().collect();
        keys.sort();
        for key in keys {
            let coef = &self.terms[key];
            // A_k acts on slot k after passing the untouched slots before it.
            let mut neg = false;
            let mut before = 0i32;
            for (k, alpha) in key.iter().enumerate() {
                if ctx.mono_degree(*alpha).rem_euclid(2) == 1 && before.rem_euclid(2) == 1 {
                    neg = !neg;
                }
                before += inputs[k].0;
            }
            let mut acc: Option<GradedPoly<C>> = None;
            for (k, alpha) in key.iter().enumerate() {
                let x = memo[k].entry(*alpha).or_insert_with(|| inputs[k].1.derive_multi(*alpha));
                if x.is_zero() {
                    acc = Some(GradedPoly::zero(ctx));
                    break;
                }
                acc = Some(match acc {
                    None => x.clone(),
                    Some(a) => a.mul(x)?,
                });
            }
            let val = acc.expect("arity is positive");
            let c = if neg { -coef.clone() } else { coef.clone() };
            for (m, v) in val.terms {
                out.add_term(m, v * c.clone());
            }
        }
        Ok(out)
    }
}

/// `D_Γ` evaluated on inputs.
pub fn apply_graph<C: Coeff>(
    ctx: &Arc<OddSymplecticContext>,
    g: &GraphMonomial,
    inputs: &[GradedPoly<C>],
) -> Result<GradedPoly<C>> {
    DiffOperator::from_graph(ctx, g).apply(inputs)
}

/// The operator of a chain evaluated on inputs.
pub fn apply_chain<C: Coeff>(
    ctx: &Arc<OddSymplecticContext>,
    x: &GraphChain,
    inputs: &[GradedPoly<C>],
) -> Result<GradedPoly<C>> {
    DiffOperator::from_chain(ctx, x).apply(inputs)
}

/// `D_{ij}` or `D_k` applied to a tensor of homogeneous inputs, before the
/// product: returns the resulting list of signed tensors.
pub fn apply_generator(
    ctx: &Arc<OddSymplecticContext>,
    g: Gen,
    inputs: &[GradedPoly<Q>],
) -> Result<Vec<(i8, Vec<GradedPoly<Q>>)>> {
    let n = inputs.len() + 1;
    if crate::graphs::generators(n).iter().all(|x| *x != g) {
        return domain(format!("generator {g} does not act on {} inputs", inputs.len()));
    }
    let mut degrees = Vec::new();
    for x in inputs {
        match x.homogeneous_degree() {
            Some(d) => degrees.push(d),
            None => return domain(format!("input {x} is not homogeneous")),
        }
    }
    let mut out = Vec::new();
    for [first, second] in generator_ops(ctx, g) {
        let mut t: Vec<GradedPoly<Q>> = inputs.to_vec();
        let mut degs = degrees.clone();
        let mut sign = 1i8;
        for (slot, v) in [second, first] {
            let k = slot - 1;
            if ctx.is_odd(v) && degs[..k].iter().sum::<i32>().rem_euclid(2) == 1 {
                sign = -sign;
            }
            t[k] = t[k].derivative(v);
            degs[k] -= ctx.degree(v);
        }
        if t.iter().all(|x| !x.is_zero()) {
            out.push((sign, t));
        }
    }
    Ok(out)
}

/// Both sides of the graded Leibniz rule
/// `∂_{p_μ}(f₁⋯f_N ∂_{q^μ}g) = Σᵢ ± f₁⋯∂_{p_μ}fᵢ⋯f_N ∂_{q^μ}g ± f₁⋯f_N Δ_μ g`
/// summed over `μ`; returns their difference.
pub fn leibniz_witness(fs: &[GradedPoly<Q>], g: &GradedPoly<Q>) -> Result<GradedPoly<Q>> {
    let ctx = g.context().clone();
    let mut degrees = Vec::new();
    for f in fs {
        match f.homogeneous_degree() {
            Some(d) => degrees.push(d),
            None => return domain(format!("input {f} is not homogeneous")),
        }
    }
    let one = GradedPoly::constant(&ctx, Q::one());
    let product = |xs: &[GradedPoly<Q>]| -> Result<GradedPoly<Q>> { xs.iter().try_fold(one.clone(), |a, x| a.mul(x)) };
    let mut diff = GradedPoly::zero(&ctx);
    for mu in 0..ctx.d {
        let (q, p) = (ctx.q(mu), ctx.p(mu));
        let p_odd = ctx.is_odd(p);
        let dqg = g.derivative(q);
        let lhs = product(fs)?.mul(&dqg)?.derivative(p);
        let mut rhs = GradedPoly::zero(&ctx);
        let mut before = 0i32;
        for (i, f) in fs.iter().enumerate() {
            let mut xs = fs.to_vec();
            xs[i] = f.derivative(p);
            let mut t = product(&xs)?.mul(&dqg)?;
            if p_odd && before.rem_euclid(2) == 1 {
                t = t.neg();
            }
            rhs = rhs.add(&t)?;
            before += degrees[i];
        }
        let mut last = product(fs)?.mul(&dqg.derivative(p))?;
        if p_odd && before.rem_euclid(2) == 1 {
            last = last.neg();
        }
        rhs = rhs.add(&last)?;
        diff = diff.add(&lhs.sub(&rhs)?)?;
    }
    Ok(diff)
}

/// Results of the BV axiom suite on random inputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub d: usize,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn parity(x: i32) -> bool {
    x.rem_euclid(2) == 1
}

fn signed(x: GradedPoly<Q>, neg: bool) -> GradedPoly<Q> {
    if neg {
        x.neg()
    } else {
        x
    }
}

/// Checks `Δ² = 0` and, for homogeneous `f, g, h`,
/// `{f, {g, h}} = (-1)^{|f|+1} {{f, g}, h} + (-1)^{(|f|+1)(|g|+1)} {g, {f, h}}`,
/// `{f, gh} = {f, g}h + (-1)^{(|f|+1)|g|} g{f, h}` and
/// `Δ{f, g} = -{Δf, g} - (-1)^{|f|} {f, Δg}`. These are the usual BV
/// identities for the bracket `(-1)^{|f|}{f, g}`.
pub fn bv_axioms(d: usize, trials: usize, seed: u64) -> Result<AxiomReport> {
    use rand::SeedableRng;
    let ctx = OddSymplecticContext::new(d)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for t in 0..trials {
        let f = random_poly(&ctx, &mut rng, 3);
        let g = random_poly(&ctx, &mut rng, 3);
        let h = random_poly(&ctx, &mut rng, 3);
        let (df, dg) = (f.homogeneous_degree().unwrap_or(0), g.homogeneous_degree().unwrap_or(0));
        if !f.delta().delta().is_zero() {
            failures.push(format!("trial {t}: Δ² f ≠ 0 for f = {f}"));
        }
        let jacobi = f
            .bracket(&g.bracket(&h)?)?
            .sub(&signed(f.bracket(&g)?.bracket(&h)?, parity(df + 1)))?
            .sub(&signed(g.bracket(&f.bracket(&h)?)?, parity((df + 1) * (dg + 1))))?;
        if !jacobi.is_zero() {
            failures.push(format!("trial {t}: Jacobi fails on ({f}, {g}, {h})"));
        }
        let leibniz = f
            .bracket(&g.mul(&h)?)?
            .sub(&f.bracket(&g)?.mul(&h)?)?
            .sub(&signed(g.mul(&f.bracket(&h)?)?, parity((df + 1) * dg)))?;
        if !leibniz.is_zero() {
            failures.push(format!("trial {t}: bracket is not a derivation on ({f}, {g}, {h})"));
        }
        let compat =
            f.bracket(&g)?.delta().add(&f.delta().bracket(&g)?)?.add(&signed(f.bracket(&g.delta())?, parity(df)))?;
        if !compat.is_zero() {
            failures.push(format!("trial {t}: Δ is not a derivation of the bracket on ({f}, {g})"));
        }
    }
    Ok(AxiomReport { trials, d, failures })
}

/// `νₙ(inputs)` through the explicit formula `Σ_c ∫ α_reg(c) D_{γ(c)}`,
/// split by coefficient: one polynomial per MZV monomial when the periods
/// are exact, one per prime otherwise.
pub fn nu_operator(
    n: usize,
    inputs: &[GradedPoly<Q>],
    mode: PeriodMode,
    table: &RelationTable,
) -> Result<Vec<(Coefficient, GradedPoly<Q>)>> {
    if n == 4 {
        return Ok(Vec::new());
    }
    let ctx = match inputs.first() {
        Some(f) => f.context().clone(),
        None => return domain("nu_operator needs at least one input"),
    };
    if inputs.len() != n - 1 {
        return domain(format!("ν{n} takes {} inputs, got {}", n - 1, inputs.len()));
    }
    nu_chains(n, mode, Realization::Gamma, table)?
        .into_iter()
        .map(|w| Ok((w.weight, apply_chain(&ctx, &w.chain, inputs)?)))
        .collect()
}

fn weighted_sum(parts: &[(Coefficient, GradedPoly<Q>)], ctx: &Arc<OddSymplecticContext>) -> Result<GradedPoly<f64>> {
    let mut out = GradedPoly::<f64>::zero(ctx);
    for (c, f) in parts {
        out = out.add(&f.to_f64().scale(&c.value))?;
    }
    Ok(out)
}

/// Compares `nu_operator(5)` with the operadic `ν₅` (its BV class
/// representatives pushed through the representation) on random inputs.
pub fn nu5_match(d: usize, trials: usize, seed: u64, table: &RelationTable) -> Result<IdentityReport> {
    use rand::SeedableRng;
    let ctx = OddSymplecticContext::new(d)?;
    let classes = nu_chains(5, PeriodMode::SymbolicKnown, Realization::Classes, table)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual: f64 = 0.0;
    let mut nonzero_trials = 0;
    let mut exact_zero = true;
    let mut witness = None;
    for _ in 0..trials {
        let inputs: Vec<GradedPoly<Q>> = (0..4).map(|_| random_poly_sparse(&ctx, &mut rng, 4, 0.2)).collect();
        let explicit = nu_operator(5, &inputs, PeriodMode::SymbolicKnown, table)?;
        let operadic: Vec<(Coefficient, GradedPoly<Q>)> = classes
            .iter()
            .map(|w| Ok((w.weight.clone(), apply_chain(&ctx, &w.chain, &inputs)?)))
            .collect::<Result<_>>()?;
        if explicit.iter().any(|(_, f)| !f.is_zero()) {
            nonzero_trials += 1;
        }
        for (c, f) in &explicit {
            let other = operadic.iter().find(|(c2, _)| c2.exact == c.exact).map(|(_, g)| g.clone());
            let diff = f.sub(&other.unwrap_or_else(|| GradedPoly::zero(&ctx)))?;
            if !diff.is_zero() {
                exact_zero = false;
            }
        }
        let residual = weighted_sum(&explicit, &ctx)?.sub(&weighted_sum(&operadic, &ctx)?)?.max_abs();
        if residual > max_residual {
            max_residual = residual;
            witness = Some(inputs.iter().map(|f| f.to_string()).collect());
        }
    }
    let tol = 1e-8;
    Ok(IdentityReport {
        check: "nu5-match".into(),
        n: 5,
        d,
        trials,
        max_residual,
        nonzero_trials,
        exact_zero,
        passed: exact_zero && max_residual < tol,
        witness: if exact_zero { None } else { witness },
        note: REPRESENTATION_NOTE.into(),
    })
}
