//! The operations `νₙ = Σ_P ∫α_P ⊗ g_P` and checks of the A∞ relations
//! and of the derivation property through the Darboux representation.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arnold::{kz, regularize};
use crate::darboux::{random_poly, random_poly_sparse, DiffOperator, GradedPoly, OddSymplecticContext};
use crate::diagrams::{bracketing_to_diagram, enumerate, prime_bracketings, ChordMonomial, DiagramClass};
use crate::error::{domain, Result};
use crate::graphs::{
    compose_chains, extract_bv, gamma_chain, pretty_print_bv, pretty_print_bv_ascii, BVClassVector, Gen, GraphChain,
};
use crate::mzv::{evaluate_f64, mzv_mul, MZVExpr, Monomial, RelationTable};
use crate::periods::{period, Method};
use crate::Q;

/// Largest polygon for which `νₙ` is assembled.
pub const MAX_N: usize = 7;

/// How period coefficients are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodMode {
    /// Numerical integrals only.
    Numeric,
    /// Numerical integrals fitted to the relation table when possible.
    SymbolicKnown,
}

impl std::str::FromStr for PeriodMode {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(PeriodMode::Numeric),
            "symbolic" | "symbolic_known" | "symbolic-known" => Ok(PeriodMode::SymbolicKnown),
            _ => domain(format!("unknown period mode {s:?}")),
        }
    }
}

/// Which chain realizes `νₙ` as graph operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Realization {
    /// `Σ_P ∫α_P · rep(g_P)`, with the bracket representatives of the BV
    /// classes.
    Classes,
    /// `Σ_c ∫α_reg(c) · γ(c)` over all chord monomials.
    Gamma,
}

/// A period with its numerical value and, when recognized, its exact form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub value: f64,
    pub error: f64,
    pub exact: Option<MZVExpr>,
}

impl Coefficient {
    pub fn exact(e: MZVExpr) -> Coefficient {
        Coefficient { value: evaluate_f64(&e), error: 0.0, exact: Some(e) }
    }

    pub fn numeric(value: f64, error: f64) -> Coefficient {
        Coefficient { value, error, exact: None }
    }
}

impl std::fmt::Display for Coefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.exact {
            Some(e) => write!(f, "{e}"),
            None => write!(f, "{}", self.value),
        }
    }
}

/// One summand `∫α_P ⊗ g_P`.
#[derive(Clone, Debug)]
pub struct ExoticTerm {
    pub prime: ChordMonomial,
    pub coefficient: Coefficient,
    pub g: BVClassVector,
}

/// The operation `νₙ` of arity `n - 1`.
#[derive(Clone, Debug)]
pub struct ExoticOperation {
    pub n: usize,
    pub terms: Vec<ExoticTerm>,
}

impl ExoticOperation {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `νₙ` as one BV class vector per MZV monomial when every coefficient
    /// is exact; `None` otherwise.
    pub fn collected(&self) -> Option<Vec<(Monomial, BVClassVector)>> {
        let mut by_mono: BTreeMap<Monomial, GraphChain> = BTreeMap::new();
        for t in &self.terms {
            let e = t.coefficient.exact.as_ref()?;
            let chain = t.g.to_chain();
            for (m, q) in e.terms() {
                by_mono.entry(m.clone()).or_insert_with(|| GraphChain::zero(self.n)).add_scaled(&chain, q);
            }
        }
        Some(by_mono.into_iter().map(|(m, c)| (m, extract_bv(&c))).filter(|(_, v)| !v.is_empty()).collect())
    }

    /// Human-readable form, for example `zeta(2)*({1,3}{2,4} + …)`.
    pub fn pretty(&self, ascii: bool) -> Result<String> {
        let render = |v: &BVClassVector| if ascii { pretty_print_bv_ascii(v) } else { pretty_print_bv(v) };
        let mut parts = Vec::new();
        match self.collected() {
            Some(groups) => {
                for (m, v) in groups {
                    let mut coef = MZVExpr::zero();
                    coef.add_term(m, Q::one());
                    if coef == MZVExpr::one() {
                        parts.push(render(&v)?);
                    } else {
                        parts.push(format!("{coef}*({})", render(&v)?));
                    }
                }
            }
            None => {
                for t in &self.terms {
                    parts.push(format!("{}*({})", t.coefficient.value, render(&t.g)?));
                }
            }
        }
        Ok(parts.join(" + "))
    }
}

/// Everything about one prime diagram needed to assemble `νₙ`.
#[derive(Clone, Debug)]
pub struct PrimeData {
    pub prime: ChordMonomial,
    /// `Σ_c ⟨α_reg(c), α_P⟩ γ(c)`.
    pub gamma: GraphChain,
    pub g: BVClassVector,
    /// The bracket representative of `g`.
    pub representative: GraphChain,
}

static PRIME_DATA: Lazy<Mutex<HashMap<usize, Arc<Vec<PrimeData>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

fn empty_triangle() -> ChordMonomial {
    ChordMonomial { n: 3, chords: Vec::new(), sign: 1 }
}

fn representative(g: &BVClassVector) -> Result<GraphChain> {
    let mut out = GraphChain::zero(g.n);
    for (t, q) in g.printed_terms()? {
        out.add_scaled(&t.representative()?, &q);
    }
    Ok(out)
}

/// `g_P` for every prime top-degree diagram on the `n`-gon, together with
/// the chains realizing it. Cached per `n`.
pub fn prime_data(n: usize) -> Result<Arc<Vec<PrimeData>>> {
    if !(3..=MAX_N + 1).contains(&n) {
        return domain(format!("prime data is available for 3 <= n <= {}, got {n}", MAX_N + 1));
    }
    if let Some(d) = PRIME_DATA.lock().expect("cache lock").get(&n) {
        return Ok(d.clone());
    }
    let data = if n == 3 {
        let unit = GraphChain::unit(3);
        let g = extract_bv(&unit);
        vec![PrimeData { prime: empty_triangle(), gamma: unit.clone(), representative: representative(&g)?, g }]
    } else {
        let primes: Vec<ChordMonomial> = prime_bracketings(n - 1).iter().map(bracketing_to_diagram).collect();
        let monomials = enumerate(n, n - 3, DiagramClass::All)?;
        let contributions: Vec<Vec<(usize, Q, GraphChain)>> = monomials
            .par_iter()
            .map(|c| -> Result<Vec<(usize, Q, GraphChain)>> {
                let v = regularize(&kz(c))?;
                if v.coeffs.is_empty() {
                    return Ok(Vec::new());
                }
                let g = gamma_chain(c)?;
                Ok(primes
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| {
                        let q = v.coefficient(p);
                        (!q.is_zero()).then(|| (i, q, g.clone()))
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        let mut gammas = vec![GraphChain::zero(n); primes.len()];
        for (i, q, g) in contributions.into_iter().flatten() {
            gammas[i].add_scaled(&g, &q);
        }
        primes
            .into_iter()
            .zip(gammas)
            .map(|(prime, gamma)| {
                let g = extract_bv(&gamma);
                Ok(PrimeData { prime, representative: representative(&g)?, gamma, g })
            })
            .collect::<Result<_>>()?
    };
    let data = Arc::new(data);
    PRIME_DATA.lock().expect("cache lock").insert(n, data.clone());
    Ok(data)
}

/// `g_P` for a prime top-degree diagram.
pub fn compute_gp(p: &ChordMonomial) -> Result<BVClassVector> {
    let data = prime_data(p.n)?;
    let d = data
        .iter()
        .find(|d| d.prime.chords == p.chords)
        .ok_or_else(|| crate::Error::Domain(format!("{p} is not a prime top-degree diagram")))?;
    Ok(if p.sign == d.prime.sign { d.g.clone() } else { extract_bv(&d.g.to_chain().scale(&-Q::one())) })
}

/// Integration tolerance used for the periods of the `n`-gon.
pub fn period_tolerance(n: usize) -> f64 {
    match n {
        0..=5 => 1e-11,
        6 => 1e-9,
        _ => 1e-6,
    }
}

static PERIODS: Lazy<Mutex<HashMap<usize, Arc<Vec<Coefficient>>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

/// Periods of the prime forms of the `n`-gon in the order of
/// [`prime_data`], each fitted against `table` when possible.
pub fn prime_periods(n: usize, table: &RelationTable) -> Result<Arc<Vec<Coefficient>>> {
    if let Some(p) = PERIODS.lock().expect("cache lock").get(&n) {
        return Ok(p.clone());
    }
    let data = prime_data(n)?;
    let out: Vec<Coefficient> = if n == 3 {
        vec![Coefficient::exact(MZVExpr::one())]
    } else {
        let tol = period_tolerance(n);
        data.par_iter()
            .map(|d| {
                let r = period(&d.prime, Method::Nested, tol, table)?;
                Ok(Coefficient { value: r.value, error: r.error, exact: r.fitted })
            })
            .collect::<Result<_>>()?
    };
    let out = Arc::new(out);
    PERIODS.lock().expect("cache lock").insert(n, out.clone());
    Ok(out)
}

/// `νₙ` with its period coefficients.
pub fn compute_nu(n: usize, mode: PeriodMode, table: &RelationTable) -> Result<ExoticOperation> {
    if !(3..=MAX_N).contains(&n) {
        return domain(format!("compute_nu supports 3 <= n <= {MAX_N}, got {n}"));
    }
    let data = prime_data(n)?;
    let periods = prime_periods(n, table)?;
    let terms = data
        .iter()
        .zip(periods.iter())
        .map(|(d, c)| {
            let coefficient = match mode {
                PeriodMode::Numeric if n > 3 => Coefficient { exact: None, ..c.clone() },
                _ => c.clone(),
            };
            ExoticTerm { prime: d.prime.clone(), coefficient, g: d.g.clone() }
        })
        .collect();
    Ok(ExoticOperation { n, terms })
}

/// A chain of graph operations with a scalar weight. Exact weights are
/// single MZV monomials.
#[derive(Clone, Debug)]
pub struct WeightedChain {
    pub weight: Coefficient,
    pub chain: GraphChain,
}

/// `νₙ` as weighted graph chains: one per MZV monomial when every period is
/// exact, one per prime otherwise.
pub fn nu_chains(
    n: usize,
    mode: PeriodMode,
    realization: Realization,
    table: &RelationTable,
) -> Result<Vec<WeightedChain>> {
    let op = compute_nu(n, mode, table)?;
    let data = prime_data(n)?;
    let chain_of = |i: usize| match realization {
        Realization::Classes => &data[i].representative,
        Realization::Gamma => &data[i].gamma,
    };
    let all_exact = op.terms.iter().all(|t| t.coefficient.exact.is_some());
    if all_exact {
        let mut by_mono: BTreeMap<Monomial, GraphChain> = BTreeMap::new();
        for (i, t) in op.terms.iter().enumerate() {
            for (m, q) in t.coefficient.exact.as_ref().expect("checked").terms() {
                by_mono.entry(m.clone()).or_insert_with(|| GraphChain::zero(n)).add_scaled(chain_of(i), q);
            }
        }
        Ok(by_mono
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, chain)| {
                let mut e = MZVExpr::zero();
                e.add_term(m, Q::one());
                WeightedChain { weight: Coefficient::exact(e), chain }
            })
            .collect())
    } else {
        Ok(op
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| WeightedChain {
                weight: Coefficient { exact: None, ..t.coefficient.clone() },
                chain: chain_of(i).clone(),
            })
            .collect())
    }
}

fn multiply_weights(a: &Coefficient, b: &Coefficient, table: &RelationTable) -> Vec<Coefficient> {
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => mzv_mul(x, y, table)
            .terms()
            .map(|(m, q)| {
                let mut e = MZVExpr::zero();
                e.add_term(m.clone(), q.clone());
                Coefficient::exact(e)
            })
            .collect(),
        _ => vec![Coefficient::numeric(a.value * b.value, a.value.abs() * b.error + b.value.abs() * a.error)],
    }
}

/// Adds `chain` to the piece with the same exact monomial, or appends it.
fn push_piece(pieces: &mut Vec<WeightedChain>, weight: Coefficient, chain: GraphChain) {
    if let Some(e) = &weight.exact {
        let (m, q) = e.terms().next().map(|(m, q)| (m.clone(), q.clone())).expect("nonzero weight");
        let mut unit = MZVExpr::zero();
        unit.add_term(m, Q::one());
        if let Some(p) = pieces.iter_mut().find(|p| p.weight.exact.as_ref() == Some(&unit)) {
            p.chain.add_scaled(&chain, &q);
        } else {
            pieces.push(WeightedChain { weight: Coefficient::exact(unit), chain: chain.scale(&q) });
        }
    } else {
        pieces.push(WeightedChain { weight, chain });
    }
}

/// Options shared by the identity checkers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckConfig {
    pub d: usize,
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    pub mode: PeriodMode,
    pub realization: Realization,
    /// Relative change of the first coefficient of the highest `ν` in the
    /// relation, to confirm that the check is sensitive.
    pub perturbation: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            d: 3,
            trials: 20,
            tol: 1e-8,
            seed: 7,
            mode: PeriodMode::SymbolicKnown,
            realization: Realization::Classes,
            perturbation: None,
        }
    }
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub check: String,
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub max_residual: f64,
    /// Trials on which some individual operation gave a nonzero output, so
    /// that the cancellation was actually exercised.
    pub nonzero_trials: usize,
    /// Every exactly weighted part vanished identically.
    pub exact_zero: bool,
    pub passed: bool,
    pub witness: Option<Vec<String>>,
    pub note: String,
}

/// Caveat attached to every representation-based check.
pub const REPRESENTATION_NOTE: &str =
    "checked as polydifferential operators on the Darboux algebra with finitely many \
variables; agreement there is evidence for the identity of BV operations, not a proof";

fn perturb(pieces: &mut [WeightedChain], rel: f64) {
    if let Some(p) = pieces.first_mut() {
        // Graphs without tadpoles are first order in every slot, hence
        // Hochschild cocycles for the product and invisible to the
        // arity-(n+1) relation; perturb a graph with a tadpole when present.
        let first = p
            .chain
            .terms()
            .find(|(m, _)| m.gens.iter().any(|g| matches!(g, Gen::S(_))))
            .or_else(|| p.chain.terms().next())
            .map(|(m, c)| (m, c.clone()));
        if let Some((m, c)) = first {
            let eps = Q::from_float(rel).unwrap_or_else(Q::zero);
            let delta = GraphChain::from_monomial(&m, c * eps);
            p.chain.add_scaled(&delta, &Q::one());
        }
    }
}

fn nu_for_check(n: usize, cfg: &CheckConfig, table: &RelationTable) -> Result<Vec<WeightedChain>> {
    if n == 4 {
        return Ok(Vec::new());
    }
    nu_chains(n, cfg.mode, cfg.realization, table)
}

/// The compositions `Σᵢ ± ν_a ∘ᵢ ν_b` over `a + b = n + 2`, with the signs
/// `(-1)^{r + st}` of `m_u(1^r ⊗ m_s ⊗ 1^t)`, one per pair of weighted
/// pieces and product monomial, not yet collected.
fn relation_terms(n: usize, cfg: &CheckConfig, table: &RelationTable) -> Result<Vec<WeightedChain>> {
    if !(5..=MAX_N + 1).contains(&n) {
        return domain(format!("A∞ relations are checked for 5 <= n <= {}, got {n}", MAX_N + 1));
    }
    let mut nus: HashMap<usize, Vec<WeightedChain>> = HashMap::new();
    for a in 3..=n - 1 {
        let mut v = nu_for_check(a, cfg, table)?;
        if a == n - 1 {
            if let Some(rel) = cfg.perturbation {
                perturb(&mut v, rel);
            }
        }
        nus.insert(a, v);
    }
    let mut terms = Vec::new();
    for a in 3..=n - 1 {
        let b = n + 2 - a;
        let (u, s) = (a - 1, b - 1);
        for pa in &nus[&a] {
            for pb in &nus[&b] {
                let mut chain = GraphChain::zero(n);
                for r in 0..u {
                    let t = u - 1 - r;
                    let sign = if (r + s * t) % 2 == 1 { -Q::one() } else { Q::one() };
                    chain.add_scaled(&compose_chains(&pa.chain, &pb.chain, r + 1)?, &sign);
                }
                if chain.is_zero() {
                    continue;
                }
                for weight in multiply_weights(&pa.weight, &pb.weight, table) {
                    terms.push(WeightedChain { weight, chain: chain.clone() });
                }
            }
        }
    }
    Ok(terms)
}

/// The A∞ relation of polygon size `n` as weighted chains, one per MZV
/// monomial when the periods are exact.
pub fn ainfty_relation(n: usize, cfg: &CheckConfig, table: &RelationTable) -> Result<Vec<WeightedChain>> {
    let mut pieces = Vec::new();
    for t in relation_terms(n, cfg, table)? {
        push_piece(&mut pieces, t.weight, t.chain);
    }
    Ok(pieces)
}

/// Evaluates weighted operators on one input tuple. Exact weights are
/// collected by MZV monomial and must cancel exactly; the numerical
/// combination of everything gives the residual.
fn evaluate_pieces(ops: &[(Coefficient, DiffOperator<Q>)], inputs: &[GradedPoly<Q>]) -> Result<Trial> {
    let ctx = inputs.first().map(|f| f.context().clone()).ok_or_else(|| crate::Error::Domain("no inputs".into()))?;
    let mut total: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    let mut exact: BTreeMap<Monomial, GradedPoly<Q>> = BTreeMap::new();
    let mut nonzero = false;
    for (w, op) in ops {
        let v = op.apply(inputs)?;
        if v.is_zero() {
            continue;
        }
        nonzero = true;
        if let Some((m, q)) = w.exact.as_ref().and_then(|e| e.terms().next()) {
            let acc = exact.entry(m.clone()).or_insert_with(|| GradedPoly::zero(&ctx));
            *acc = acc.add(&v.scale(q))?;
        }
        for (m, c) in v.terms() {
            *total.entry(m).or_insert(0.0) += w.value * c.to_f64().unwrap_or(f64::NAN);
        }
    }
    Ok(Trial {
        residual: total.values().map(|x| x.abs()).fold(0.0, f64::max),
        exact_zero: exact.values().all(GradedPoly::is_zero),
        nonzero,
        inputs: inputs.to_vec(),
    })
}

/// Outcome of one random evaluation.
struct Trial {
    residual: f64,
    exact_zero: bool,
    nonzero: bool,
    inputs: Vec<GradedPoly<Q>>,
}

/// A random `Δ`-closed element: a polynomial in the even variables `q`
/// when `even_only`, otherwise `Δh` for a random `h`.
fn random_closed(ctx: &Arc<OddSymplecticContext>, rng: &mut ChaCha8Rng, even_only: bool) -> GradedPoly<Q> {
    loop {
        let h = random_poly(ctx, rng, 4);
        let f = if even_only {
            let mut f = GradedPoly::zero(ctx);
            for _ in 0..rng.gen_range(1..=3) {
                let mut t = GradedPoly::constant(ctx, Q::from_integer(rng.gen_range(-3i64..=3).into()));
                for mu in 1..=ctx.d {
                    for _ in 0..rng.gen_range(0..=3) {
                        t = t.mul(&GradedPoly::q(ctx, mu).expect("valid index")).expect("same context");
                    }
                }
                f = f.add(&t).expect("same context");
            }
            f
        } else {
            h.delta()
        };
        if !f.is_zero() {
            return f;
        }
    }
}

fn random_inputs(ctx: &Arc<OddSymplecticContext>, rng: &mut ChaCha8Rng, k: usize) -> Vec<GradedPoly<Q>> {
    (0..k).map(|_| random_poly_sparse(ctx, rng, 4, 0.2)).collect()
}

/// Checks the A∞ relation of polygon size `n` (operations of total arity
/// `n - 1`) on random inputs.
pub fn ainfty_check(n: usize, cfg: &CheckConfig, table: &RelationTable) -> Result<IdentityReport> {
    let ctx = OddSymplecticContext::new(cfg.d)?;
    let pieces = relation_terms(n, cfg, table)?;
    let ops: Vec<(Coefficient, DiffOperator<Q>)> =
        pieces.par_iter().map(|p| (p.weight.clone(), DiffOperator::from_chain(&ctx, &p.chain))).collect();
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|t| cfg.seed.wrapping_mul(1_000_003).wrapping_add(t)).collect();
    let results: Vec<Trial> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            evaluate_pieces(&ops, &random_inputs(&ctx, &mut rng, n - 1))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(format!("ainfty n={n}"), n, cfg, results))
}

fn summarize(check: String, n: usize, cfg: &CheckConfig, results: Vec<Trial>) -> IdentityReport {
    let max_residual = results.iter().map(|r| r.residual).fold(0.0, f64::max);
    let exact_zero = results.iter().all(|r| r.exact_zero);
    let nonzero_trials = results.iter().filter(|r| r.nonzero).count();
    let passed = max_residual < cfg.tol;
    let witness = (!passed)
        .then(|| {
            results
                .iter()
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
                .map(|r| r.inputs.iter().map(|x| x.to_string()).collect())
        })
        .flatten();
    IdentityReport {
        check,
        n,
        d: cfg.d,
        trials: cfg.trials,
        max_residual,
        nonzero_trials,
        exact_zero,
        passed,
        witness,
        note: REPRESENTATION_NOTE.into(),
    }
}

/// Checks that `{f, -}` is a derivation of `νₙ`:
/// `{f, ν(g₁, …)} = Σᵢ (-1)^{(|f|+1)(|ν| + |g₁| + … + |g_{i-1}|)} ν(g₁, …, {f, gᵢ}, …)`.
pub fn derivation_check(n: usize, cfg: &CheckConfig, table: &RelationTable) -> Result<IdentityReport> {
    if n == 4 || !(3..=MAX_N).contains(&n) {
        return domain(format!("derivation checks run for n = 3 and 5 <= n <= {MAX_N}, got {n}"));
    }
    let ctx = OddSymplecticContext::new(cfg.d)?;
    let mut pieces = nu_chains(n, cfg.mode, cfg.realization, table)?;
    if let Some(rel) = cfg.perturbation {
        perturb(&mut pieces, rel);
    }
    let ops: Vec<(Coefficient, DiffOperator<Q>)> =
        pieces.iter().map(|p| (p.weight.clone(), DiffOperator::from_chain(&ctx, &p.chain))).collect();
    let nu_parity = (n - 3) % 2 == 1;
    let seeds: Vec<u64> = (0..cfg.trials as u64).map(|t| cfg.seed.wrapping_mul(999_983).wrapping_add(t)).collect();
    let results: Vec<Trial> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let f = random_closed(&ctx, &mut rng, s % 2 == 0);
            let gs = random_inputs(&ctx, &mut rng, n - 1);
            let f_odd = f.homogeneous_degree().unwrap_or(0).rem_euclid(2) == 1;
            let mut total: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
            let mut exact_zero = true;
            let mut nonzero = false;
            for (w, op) in &ops {
                let mut diff = f.bracket(&op.apply(&gs)?)?;
                nonzero |= !diff.is_zero();
                let mut before = nu_parity;
                for i in 0..gs.len() {
                    let mut moved = gs.clone();
                    moved[i] = f.bracket(&gs[i])?;
                    let t = op.apply(&moved)?;
                    // {f, -} has the parity of |f| + 1.
                    let neg = !f_odd && before;
                    diff = if neg { diff.add(&t)? } else { diff.sub(&t)? };
                    before ^= gs[i].homogeneous_degree().unwrap_or(0).rem_euclid(2) == 1;
                }
                if w.exact.is_some() && !diff.is_zero() {
                    exact_zero = false;
                }
                for (m, c) in diff.terms() {
                    *total.entry(m).or_insert(0.0) += w.value * c.to_f64().unwrap_or(f64::NAN);
                }
            }
            let mut inputs = vec![f];
            inputs.extend(gs);
            Ok(Trial { residual: total.values().map(|x| x.abs()).fold(0.0, f64::max), exact_zero, nonzero, inputs })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(format!("derivation n={n}"), n, cfg, results))
}
