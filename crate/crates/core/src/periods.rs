//! Dihedral coordinates on the open associahedron in the simplex chart
//! `z₁ = 0 < t₁ < … < t_{n-3} < 1 = z_{n-1}`, `z_n = ∞`, the top-degree
//! logarithmic form of a prime diagram, and its numerical integral.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagrams::{is_prime, Chord, ChordMonomial};
use crate::error::{domain, Error, Result};
use crate::mzv::{fit_mzv, MZVExpr, RelationTable};

/// Integration method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Iterated one-dimensional double-exponential quadrature with step
    /// halving at every level.
    Nested,
    /// Seeded Monte Carlo sampling.
    MonteCarlo { samples: u64, seed: u64 },
}

/// A point of the open simplex `0 < t₁ < … < t_{n-3} < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint {
    pub n: usize,
    pub t: Vec<f64>,
}

impl SimplexPoint {
    pub fn new(n: usize, t: Vec<f64>) -> Result<SimplexPoint> {
        if n < 4 || t.len() != n - 3 {
            return domain(format!("a point of the {n}-gon chart needs {} coordinates", n.saturating_sub(3)));
        }
        let inside = t.first().is_none_or(|&x| x > 0.0)
            && t.last().is_none_or(|&x| x < 1.0)
            && t.windows(2).all(|w| w[0] < w[1]);
        if !inside {
            return domain(format!("{t:?} is not in the open simplex"));
        }
        Ok(SimplexPoint { n, t })
    }
}

/// Position of a marked point: a fixed value, a coordinate, or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Pos {
    Fixed(f64),
    Var(usize),
    Infinity,
}

fn position(n: usize, v: usize) -> Pos {
    match v {
        1 => Pos::Fixed(0.0),
        v if v == n => Pos::Infinity,
        v if v == n - 1 => Pos::Fixed(1.0),
        v => Pos::Var(v - 2),
    }
}

/// The cross-ratio `u_c` as a sign times a product of differences
/// `(z_a - z_b)^{±1}`, with the two factors containing `z_n` cancelled.
#[derive(Clone, Debug)]
struct CrossRatio {
    sign: f64,
    factors: Vec<(Pos, Pos, i32)>,
}

fn cross_ratio(n: usize, c: &Chord) -> CrossRatio {
    let (i, j) = c.endpoints();
    let nx = |v: usize| if v == n { 1 } else { v + 1 };
    let raw = [(i, nx(j), 1), (nx(i), j, 1), (i, j, -1), (nx(i), nx(j), -1)];
    let mut sign = 1.0;
    let mut factors = Vec::new();
    let mut inf_num = None;
    let mut inf_den = None;
    for (a, b, e) in raw {
        if a == n || b == n {
            let first = a == n;
            if e > 0 {
                inf_num = Some(first);
            } else {
                inf_den = Some(first);
            }
        } else {
            factors.push((position(n, a), position(n, b), e));
        }
    }
    match (inf_num, inf_den) {
        (Some(x), Some(y)) => {
            if x != y {
                sign = -1.0;
            }
        }
        (None, None) => {}
        _ => unreachable!("z_n enters a chord's cross-ratio once in the numerator and once in the denominator"),
    }
    CrossRatio { sign, factors }
}

fn value(p: Pos, t: &[f64]) -> f64 {
    match p {
        Pos::Fixed(x) => x,
        Pos::Var(k) => t[k],
        Pos::Infinity => unreachable!("infinite factors are cancelled"),
    }
}

/// The dihedral coordinate `u_c` at a point of the chart.
pub fn dihedral_coordinate(n: usize, c: &Chord, p: &SimplexPoint) -> Result<f64> {
    if c.n() != n || p.n != n {
        return domain(format!("chord {c} and point do not both live on the {n}-gon"));
    }
    let cr = cross_ratio(n, c);
    let mut u = cr.sign;
    for (a, b, e) in &cr.factors {
        let d = value(*a, &p.t) - value(*b, &p.t);
        u *= if *e > 0 { d } else { 1.0 / d };
    }
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::Internal(format!("u_{c} = {u} at {:?}", p.t)));
    }
    Ok(u)
}

/// Precompiled `d log u` rows of a diagram.
#[derive(Clone, Debug)]
struct LogForm {
    m: usize,
    sign: f64,
    rows: Vec<Vec<(Pos, Pos, f64)>>,
}

impl LogForm {
    fn new(p: &ChordMonomial) -> LogForm {
        let rows = p
            .chords
            .iter()
            .map(|c| cross_ratio(p.n, c).factors.into_iter().map(|(a, b, e)| (a, b, e as f64)).collect())
            .collect();
        LogForm { m: p.n - 3, sign: p.sign as f64, rows }
    }

    fn eval(&self, t: &[f64], mat: &mut [f64]) -> f64 {
        let m = self.m;
        mat.iter_mut().for_each(|x| *x = 0.0);
        for (r, row) in self.rows.iter().enumerate() {
            for &(a, b, e) in row {
                let d = e / (value(a, t) - value(b, t));
                if let Pos::Var(k) = a {
                    mat[r * m + k] += d;
                }
                if let Pos::Var(k) = b {
                    mat[r * m + k] -= d;
                }
            }
        }
        self.sign * det(mat, m)
    }
}

fn det(a: &mut [f64], m: usize) -> f64 {
    let mut d = 1.0;
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs())).unwrap_or(c);
        if a[p * m + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
            }
            d = -d;
        }
        let piv = a[c * m + c];
        d *= piv;
        for r in c + 1..m {
            let f = a[r * m + c] / piv;
            if f != 0.0 {
                for k in c..m {
                    a[r * m + k] -= f * a[c * m + k];
                }
            }
        }
    }
    d
}

fn check_prime_top(p: &ChordMonomial) -> Result<()> {
    if p.n < 5 || p.degree() != p.n - 3 {
        return domain(format!("{p} is not a top-degree diagram on a polygon with n >= 5"));
    }
    if !is_prime(p) {
        return domain(format!("{p} is not prime"));
    }
    Ok(())
}

/// The coefficient of `dt₁ ∧ … ∧ dt_{n-3}` in `α_P` at a point.
pub fn integrand(p: &ChordMonomial, pt: &SimplexPoint) -> Result<f64> {
    check_prime_top(p)?;
    form_value(p, pt)
}

/// The coefficient of `dt₁ ∧ … ∧ dt_{n-3}` in any top-degree monomial form
/// at a point of the open simplex.
pub fn form_value(p: &ChordMonomial, pt: &SimplexPoint) -> Result<f64> {
    if p.n < 5 || p.degree() != p.n - 3 {
        return domain(format!("{p} is not a top-degree diagram on a polygon with n >= 5"));
    }
    if pt.n != p.n {
        return domain("point and diagram live on different polygons");
    }
    let f = LogForm::new(p);
    let mut mat = vec![0.0; f.m * f.m];
    Ok(f.eval(&pt.t, &mut mat))
}

/// Outcome of an integration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
    pub fitted: Option<MZVExpr>,
}

/// Nodes `(x, 1-x, weight)` of the double-exponential rule on `[0,1]`
/// with step `h`, odd multiples only when `odd_only`.
fn de_nodes(h: f64, odd_only: bool) -> Vec<(f64, f64, f64)> {
    const T_MAX: f64 = 3.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let kmax = (T_MAX / h).floor() as i64;
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        if odd_only && k % 2 == 0 {
            continue;
        }
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        let (lo, hi) = (e / (1.0 + e), 1.0 / (1.0 + e));
        let (x, y) = if s >= 0.0 { (hi, lo) } else { (lo, hi) };
        let w = h * std::f64::consts::PI * t.cosh() * x * y;
        out.push((x, y, w));
    }
    out
}

struct DeRule {
    levels: Vec<(f64, Vec<(f64, f64)>)>,
}

impl DeRule {
    fn new(max_level: usize) -> DeRule {
        let levels = (0..=max_level)
            .map(|l| {
                let h = 1.0 / (1u64 << l) as f64;
                let nodes = de_nodes(h, l > 0).into_iter().map(|(x, _, w)| (x, w)).collect();
                (h, nodes)
            })
            .collect();
        DeRule { levels }
    }
}

const T_RANGE: f64 = 6.0;
const MIN_LEVEL: usize = 2;
const MAX_LEVEL: usize = 8;

/// Iterated double-exponential integration over the cube `[0,1]^m`.
struct Nested<'a> {
    rule: &'a DeRule,
    evals: u64,
}

impl Nested<'_> {
    /// Integrates over the coordinates from `level` on, returning the value
    /// and an error estimate.
    fn integrate(&mut self, level: usize, tol: f64, x: &mut Vec<f64>, f: &mut dyn FnMut(&[f64]) -> f64) -> (f64, f64) {
        let m = x.len();
        if level == m {
            self.evals += 1;
            return (f(x), 0.0);
        }
        let mut sum = 0.0;
        let mut inner_err = 0.0;
        let mut prev = 0.0;
        let mut delta = f64::INFINITY;
        let mut err = f64::INFINITY;
        for (l, (h, nodes)) in self.rule.levels.iter().enumerate() {
            let h_scale = if l == 0 { 1.0 } else { 0.5 };
            let mut add = 0.0;
            let mut add_err = 0.0;
            for &(xv, w) in nodes {
                x[level] = xv;
                // Inner errors are weighted by w, so nodes with little
                // weight may be resolved more coarsely.
                let inner_tol = tol * h / (T_RANGE * w);
                let (v, e) = self.integrate(level + 1, inner_tol, x, f);
                add += w * v;
                add_err += w * e;
            }
            // The stored weights carry the step of their level; halving
            // the step halves the weight of the nodes already summed.
            sum = sum * h_scale + add;
            inner_err = inner_err * h_scale + add_err;
            if l > 0 {
                let d = (sum - prev).abs();
                // The rule converges quadratically once resolved, so the
                // error after this level is about d²/d_prev.
                err = if l >= 2 && delta > 0.0 { d.min(d * d / delta) } else { d };
                delta = d;
            }
            prev = sum;
            if l >= MIN_LEVEL && err + inner_err < tol {
                break;
            }
        }
        (sum, err + inner_err)
    }
}

/// Maps a cube point to the simplex: `t_m = x_m`, `t_k = t_{k+1} x_k`.
/// Returns the Jacobian.
fn cube_to_simplex(x: &[f64], t: &mut [f64]) -> f64 {
    let m = x.len();
    let mut jac = 1.0;
    let mut acc = 1.0;
    for k in (0..m).rev() {
        if k + 1 < m {
            jac *= acc;
        }
        acc *= x[k];
        t[k] = acc;
    }
    jac
}

/// Integrates `α_P` over the associahedron.
pub fn integrate(p: &ChordMonomial, method: Method, tol: f64) -> Result<PeriodResult> {
    check_prime_top(p)?;
    if !(tol > 0.0) {
        return domain(format!("tolerance must be positive, got {tol}"));
    }
    let form = LogForm::new(p);
    let m = form.m;
    let mut mat = vec![0.0; m * m];
    let mut t = vec![0.0; m];
    let mut f = |x: &[f64]| -> f64 {
        let jac = cube_to_simplex(x, &mut t);
        if t.iter().any(|&v| v <= 0.0 || v >= 1.0) || t.windows(2).any(|w| w[0] >= w[1]) {
            return 0.0;
        }
        jac * form.eval(&t, &mut mat)
    };
    match method {
        Method::Nested => {
            let rule = DeRule::new(MAX_LEVEL);
            let mut nested = Nested { rule: &rule, evals: 0 };
            let mut x = vec![0.0; m];
            let (value, error) = nested.integrate(0, 0.5 * tol, &mut x, &mut f);
            if error > tol || !value.is_finite() {
                return Err(Error::Budget { estimate: value, error });
            }
            Ok(PeriodResult { value, error, evaluations: nested.evals, fitted: None })
        }
        Method::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return domain("Monte Carlo needs at least two samples");
            }
            // Sampling w uniformly and x = (1 - cos πw)/2 concentrates
            // points near the faces where the form is singular.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = vec![0.0; m];
            let (mut mean, mut m2) = (0.0f64, 0.0f64);
            let pi = std::f64::consts::PI;
            for k in 1..=samples {
                let mut jac = 1.0;
                for xi in x.iter_mut() {
                    let w: f64 = rng.gen();
                    *xi = 0.5 * (1.0 - (pi * w).cos());
                    jac *= 0.5 * pi * (pi * w).sin();
                }
                let v = jac * f(&x);
                let d = v - mean;
                mean += d / k as f64;
                m2 += d * (v - mean);
            }
            let error = (m2 / (samples as f64 - 1.0) / samples as f64).sqrt();
            Ok(PeriodResult { value: mean, error, evaluations: samples, fitted: None })
        }
    }
}

/// Integrates and fits the result to a rational multiple of the weight-
/// `n-3` basis. A failed fit leaves `fitted` empty.
pub fn period(p: &ChordMonomial, method: Method, tol: f64, table: &RelationTable) -> Result<PeriodResult> {
    let mut r = integrate(p, method, tol)?;
    let fit_tol = (10.0 * r.error).max(1e-12);
    r.fitted = fit_mzv(r.value, p.n - 3, fit_tol, 100, table).ok().flatten();
    Ok(r)
}

/// Periods of several diagrams, computed in parallel.
pub fn periods(ps: &[ChordMonomial], method: Method, tol: f64, table: &RelationTable) -> Vec<Result<PeriodResult>> {
    ps.par_iter().map(|p| period(p, method, tol, table)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arnold::{dihedral_action, kz, regularize, Dihedral};
    use crate::diagrams::{bracketing_to_diagram, complete_crossing_pairs, PrimeBracketing};
    use num_traits::ToPrimitive;

    fn ch(n: usize, i: usize, j: usize) -> Chord {
        Chord::new(n, i, j).unwrap()
    }

    fn prime(s: &str) -> ChordMonomial {
        bracketing_to_diagram(&s.parse::<PrimeBracketing>().unwrap())
    }

    #[test]
    fn coordinates_in_worked_charts() {
        let p = SimplexPoint::new(5, vec![0.3, 0.7]).unwrap();
        assert!((dihedral_coordinate(5, &ch(5, 5, 3), &p).unwrap() - 0.7).abs() < 1e-15);
        assert!((dihedral_coordinate(5, &ch(5, 1, 4), &p).unwrap() - 0.7).abs() < 1e-15);
        let p = SimplexPoint::new(6, vec![0.2, 0.5, 0.8]).unwrap();
        assert!((dihedral_coordinate(6, &ch(6, 6, 4), &p).unwrap() - 0.8).abs() < 1e-15);
        assert!((dihedral_coordinate(6, &ch(6, 6, 3), &p).unwrap() - 0.5 / 0.8).abs() < 1e-15);
        assert!((dihedral_coordinate(6, &ch(6, 1, 5), &p).unwrap() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn coordinates_satisfy_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 4..=7 {
            for _ in 0..20 {
                let mut t: Vec<f64> = (0..n - 3).map(|_| rng.gen_range(0.01..0.99)).collect();
                t.sort_by(f64::total_cmp);
                let p = SimplexPoint::new(n, t).unwrap();
                for c in crate::diagrams::chords(n).unwrap() {
                    let u = dihedral_coordinate(n, &c, &p).unwrap();
                    assert!(u > 0.0 && u < 1.0);
                }
                for (a, b) in complete_crossing_pairs(n).unwrap() {
                    let pa: f64 = a.iter().map(|c| dihedral_coordinate(n, c, &p).unwrap()).product();
                    let pb: f64 = b.iter().map(|c| dihedral_coordinate(n, c, &p).unwrap()).product();
                    assert!((1.0 - pa - pb).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn worked_integrands() {
        let (s, t) = (0.3, 0.6);
        let p5 = prime("[[1,3],[2,4]]");
        let v = integrand(&p5, &SimplexPoint::new(5, vec![s, t]).unwrap()).unwrap();
        assert!((v - 1.0 / ((1.0 - s) * t)).abs() < 1e-12);
        let (x, y, z) = (0.1, 0.4, 0.7);
        let p6 = prime("[[[1,3],4],[2,5]]");
        let v = integrand(&p6, &SimplexPoint::new(6, vec![x, y, z]).unwrap()).unwrap();
        assert!((v - 1.0 / ((1.0 - x) * y * z)).abs() < 1e-12);
        let swapped = ChordMonomial { sign: -p6.sign, ..p6.clone() };
        let w = integrand(&swapped, &SimplexPoint::new(6, vec![x, y, z]).unwrap()).unwrap();
        assert_eq!(v, -w);
    }

    #[test]
    fn pentagon_period() {
        let r = integrate(&prime("[[1,3],[2,4]]"), Method::Nested, 1e-10).unwrap();
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.value - z2).abs() < 1e-9, "{r:?}");
        let mc = integrate(&prime("[[1,3],[2,4]]"), Method::MonteCarlo { samples: 200_000, seed: 1 }, 1.0).unwrap();
        assert!((mc.value - z2).abs() < 5.0 * mc.error + 1e-3, "{mc:?}");
    }

    fn z3() -> f64 {
        crate::mzv::mzv_f64(&crate::mzv::MZVWord::zeta(3).unwrap())
    }

    #[test]
    fn hexagon_periods() {
        // With the chords of each prime form ordered as its brackets, all
        // four hexagon periods are +ζ(3).
        for s in ["[[[1,3],4],[2,5]]", "[[1,3],[[2,4],5]]", "[[1,[2,4]],[3,5]]", "[[1,4],[2,[3,5]]]"] {
            let r = integrate(&prime(s), Method::Nested, 1e-7).unwrap();
            assert!((r.value - z3()).abs() < 1e-7, "{s}: {r:?}");
        }
    }

    /// The point relabelling inducing `g` on chord labels. Chord labels
    /// index sides, so a reflection of labels `i ↦ r - 1 - i` comes from
    /// the point map `p ↦ r - p`.
    fn point_map(n: usize, g: Dihedral, p: usize) -> usize {
        let r = g.rotation as i64;
        let x = if g.reflect { r - p as i64 } else { r + p as i64 };
        let x = x.rem_euclid(n as i64) as usize;
        if x == 0 {
            n
        } else {
            x
        }
    }

    /// A dihedral relabelling as a map of the chart, in the Möbius gauge
    /// sending the images of points 1, n-1, n to 0, 1, ∞.
    fn chart_map(n: usize, g: Dihedral, t: &[f64]) -> Vec<f64> {
        let z = |v: usize| -> Option<f64> {
            match v {
                1 => Some(0.0),
                v if v == n => None,
                v if v == n - 1 => Some(1.0),
                v => Some(t[v - 2]),
            }
        };
        let w = |v: usize| z(point_map(n, g, v));
        let (a, c, b) = (w(1), w(n - 1), w(n));
        let f = |x: Option<f64>| -> f64 {
            match (x, a, b, c) {
                (None, Some(a), Some(b), Some(c)) => (c - b) / (c - a),
                (Some(x), Some(a), None, Some(c)) => (x - a) / (c - a),
                (Some(x), Some(a), Some(b), None) => (x - a) / (x - b),
                (Some(x), None, Some(b), Some(c)) => (c - b) / (x - b),
                (Some(x), Some(a), Some(b), Some(c)) => (x - a) * (c - b) / ((x - b) * (c - a)),
                _ => unreachable!(),
            }
        };
        (2..n - 1).map(|v| f(w(v))).collect()
    }

    fn orientation_sign(n: usize, g: Dihedral) -> f64 {
        let m = n - 3;
        let t: Vec<f64> = (1..=m).map(|k| k as f64 / (m + 1) as f64 + 0.01 * k as f64 * k as f64).collect();
        let image = chart_map(n, g, &t);
        assert!(SimplexPoint::new(n, image).is_ok(), "the relabelling preserves the cell");
        let eps = 1e-6;
        let mut jac = vec![0.0; m * m];
        for col in 0..m {
            let (mut tp, mut tm) = (t.clone(), t.clone());
            tp[col] += eps;
            tm[col] -= eps;
            let (fp, fm) = (chart_map(n, g, &tp), chart_map(n, g, &tm));
            for row in 0..m {
                jac[row * m + col] = (fp[row] - fm[row]) / (2.0 * eps);
            }
        }
        let d = det(&mut jac, m);
        assert!(d.abs() > 1e-6);
        d.signum()
    }

    #[test]
    fn rotation_orientation_alternates() {
        assert_eq!(orientation_sign(5, Dihedral::tau(1)), 1.0);
        assert_eq!(orientation_sign(6, Dihedral::tau(1)), -1.0);
        assert_eq!(orientation_sign(7, Dihedral::tau(1)), 1.0);
    }

    #[test]
    fn periods_follow_dihedral_symmetry() {
        for n in 5..=6 {
            let primes = crate::diagrams::enumerate(n, n - 3, crate::diagrams::DiagramClass::Prime).unwrap();
            let value = |p: &ChordMonomial| integrate(p, Method::Nested, 1e-9).unwrap().value;
            for g in [Dihedral::tau(1), Dihedral::sigma()] {
                let eps = orientation_sign(n, g);
                for p in &primes {
                    let moved = regularize(&dihedral_action(&kz(p), g)).unwrap();
                    let mut total = 0.0;
                    for (chords, c) in &moved.coeffs {
                        let q = ChordMonomial { n, chords: chords.clone(), sign: 1 };
                        total += c.to_f64().unwrap() * value(&q);
                    }
                    assert!((total - eps * value(p)).abs() < 1e-7, "n={n} {g:?} {p}");
                }
            }
        }
    }

    #[test]
    fn monte_carlo_agrees_with_nested() {
        for n in 5..=6 {
            for (i, p) in
                crate::diagrams::enumerate(n, n - 3, crate::diagrams::DiagramClass::Prime).unwrap().iter().enumerate()
            {
                let a = integrate(p, Method::Nested, 1e-8).unwrap();
                let b = integrate(p, Method::MonteCarlo { samples: 100_000, seed: i as u64 }, 1.0).unwrap();
                assert!((a.value - b.value).abs() < 5.0 * b.error + 1e-3, "{p}: {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn fitted_periods() {
        let table = RelationTable::builtin();
        let r = period(&prime("[[1,3],[2,4]]"), Method::Nested, 1e-10, table).unwrap();
        assert_eq!(r.fitted.unwrap().to_string(), "zeta(2)");
        let r = period(&prime("[[1,4],[2,[3,5]]]"), Method::Nested, 1e-8, table).unwrap();
        assert_eq!(r.fitted.unwrap().to_string(), "zeta(3)");
    }

    #[test]
    fn rejects_non_prime_and_bad_points() {
        let gravity = ChordMonomial::from_pairs(5, &[(1, 3), (1, 4)]).unwrap().unwrap();
        assert!(integrate(&gravity, Method::Nested, 1e-6).is_err());
        assert!(SimplexPoint::new(5, vec![0.6, 0.3]).is_err());
        assert!(SimplexPoint::new(5, vec![0.3]).is_err());
    }
}
