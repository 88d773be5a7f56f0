//! Tube measures `#{g : v(f(g)) > alpha} / |G|` on finite quotients of
//! `GL_n(Z_ell)` and Frobenius statistics of a deformation over a place list.
//!
//! A value that vanishes at level `m` counts as lying in every tube, so the
//! top threshold `alpha = m` selects exactly the zero locus mod `ell^m`.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{self, checked_pow, gcd, is_prime, mul_mod, pow_mod, reduce_i128, val_int};
use crate::coeffring::{WittElem, WittRing};
use crate::exec::{map_reduce, slice, ExecMode};
use crate::galois_model::{Deformation, Place};
use crate::matlin::Mat;

pub const QUERY_SCHEMA_VERSION: u32 = 1;
/// Groups up to this order are enumerated.
pub const EXACT_LIMIT: u128 = 10_000_000;
/// Largest generated subgroup the closure search will build.
pub const CLOSURE_LIMIT: usize = 2_000_000;
pub const DEFAULT_SAMPLES: u64 = 200_000;
/// Fixed partition count; counts and sample streams are defined per partition.
pub const PARTITIONS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DensityError {
    #[error("alpha = {alpha} exceeds the precision m = {m}")]
    AlphaExceedsPrecision { alpha: u32, m: u32 },
    #[error("polynomial is not conjugation invariant")]
    NotConjugationInvariant,
    #[error("unsupported schema version {0}")]
    UnsupportedSchema(u32),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("generated group exceeds {0} elements")]
    GroupTooLarge(usize),
    #[error("exact enumeration needs |G| <= {limit}, got {order}")]
    TooLargeToEnumerate { order: u128, limit: u128 },
}

/// `c * prod x_i^{e_i}` over the row-major matrix entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub c: i64,
    pub e: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn constant(n: usize, c: i64) -> Self {
        Polynomial {
            terms: vec![Term { c, e: vec![0; n * n] }],
        }
    }

    fn monomial(n: usize, c: i64, idx: &[usize]) -> Term {
        let mut e = vec![0; n * n];
        for &i in idx {
            e[i] += 1;
        }
        Term { c, e }
    }

    /// `det - 1` on 2x2 matrices.
    pub fn det_minus_one() -> Self {
        Polynomial {
            terms: vec![
                Self::monomial(2, 1, &[0, 3]),
                Self::monomial(2, -1, &[1, 2]),
                Self::monomial(2, -1, &[]),
            ],
        }
    }

    /// `tr - c` on 2x2 matrices.
    pub fn trace_minus(c: i64) -> Self {
        Polynomial {
            terms: vec![
                Self::monomial(2, 1, &[0]),
                Self::monomial(2, 1, &[3]),
                Self::monomial(2, -c, &[]),
            ],
        }
    }

    /// `(a + d)^2 - 4(ad - bc)` on 2x2 matrices.
    pub fn discriminant() -> Self {
        Polynomial {
            terms: vec![
                Self::monomial(2, 1, &[0, 0]),
                Self::monomial(2, -2, &[0, 3]),
                Self::monomial(2, 1, &[3, 3]),
                Self::monomial(2, 4, &[1, 2]),
            ],
        }
    }

    pub fn nvars(&self) -> Option<usize> {
        self.terms.first().map(|t| t.e.len())
    }

    fn check(&self, n: usize) -> Result<(), DensityError> {
        if let Some(t) = self.terms.iter().find(|t| t.e.len() != n * n) {
            return Err(DensityError::InvalidQuery(format!(
                "term has {} exponents, expected {}",
                t.e.len(),
                n * n
            )));
        }
        Ok(())
    }

    /// Value modulo `modulus`.
    pub fn eval_mod(&self, x: &[u64], modulus: u64) -> u64 {
        let mut acc = 0u64;
        for t in &self.terms {
            let mut v = reduce_i128(t.c as i128, modulus);
            for (xi, &ei) in x.iter().zip(&t.e) {
                if ei > 0 {
                    v = mul_mod(v, pow_mod(*xi, ei as u128, modulus), modulus);
                }
            }
            acc = arith::add_mod(acc, v, modulus);
        }
        acc
    }

    pub fn eval_witt(&self, x: &[WittElem]) -> WittElem {
        let ring = x[0].ring();
        let mut acc = ring.zero();
        for t in &self.terms {
            let mut v = ring.from_int(t.c);
            for (xi, &ei) in x.iter().zip(&t.e) {
                if ei > 0 {
                    v = &v * &xi.pow(ei as u128);
                }
            }
            acc = &acc + &v;
        }
        acc
    }

    pub fn eval_mat(&self, g: &Mat) -> WittElem {
        self.eval_witt(g.entries())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Full,
    /// Generators as row-major integer entries, read modulo `ell^m`.
    Generated { generators: Vec<Vec<i64>> },
}

fn default_ell() -> u64 {
    5
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TubeQuery {
    pub schema_version: u32,
    #[serde(default = "default_ell")]
    pub ell: u64,
    pub n: usize,
    pub level: u32,
    pub group: GroupSpec,
    pub f: Polynomial,
    pub alpha: u32,
}

impl TubeQuery {
    pub fn full(ell: u64, n: usize, level: u32, f: Polynomial, alpha: u32) -> Self {
        TubeQuery {
            schema_version: QUERY_SCHEMA_VERSION,
            ell,
            n,
            level,
            group: GroupSpec::Full,
            f,
            alpha,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, DensityError> {
        let v: serde_json::Value =
            serde_json::from_str(s).map_err(|e| DensityError::InvalidQuery(e.to_string()))?;
        let ver = v.get("schema_version").and_then(|x| x.as_u64()).unwrap_or(0) as u32;
        if ver != QUERY_SCHEMA_VERSION {
            return Err(DensityError::UnsupportedSchema(ver));
        }
        serde_json::from_value(v).map_err(|e| DensityError::InvalidQuery(e.to_string()))
    }

    pub fn with_alpha(&self, alpha: u32) -> Self {
        TubeQuery {
            alpha,
            ..self.clone()
        }
    }

    fn modulus(&self) -> Result<u64, DensityError> {
        if !is_prime(self.ell) {
            return Err(DensityError::InvalidQuery(format!("{} is not prime", self.ell)));
        }
        if self.n == 0 || self.level == 0 {
            return Err(DensityError::InvalidQuery("n and level must be positive".into()));
        }
        if self.alpha > self.level {
            return Err(DensityError::AlphaExceedsPrecision {
                alpha: self.alpha,
                m: self.level,
            });
        }
        self.f.check(self.n)?;
        checked_pow(self.ell, self.level)
            .filter(|&q| q < 1 << 31)
            .ok_or_else(|| DensityError::InvalidQuery("ell^level too large".into()))
    }
}

/// `|GL_n(Z/ell^m)| = ell^{(m-1) n^2} prod_i (ell^n - ell^i)`, if it fits.
pub fn gl_order(ell: u64, n: usize, m: u32) -> Option<u128> {
    let ell = ell as u128;
    let mut acc = ell.checked_pow((m - 1) * (n * n) as u32)?;
    let ln = ell.checked_pow(n as u32)?;
    for i in 0..n {
        acc = acc.checked_mul(ln - ell.pow(i as u32))?;
    }
    Some(acc)
}

/// Determinant modulo the prime `ell` is nonzero.
fn unit_det(x: &[u64], n: usize, ell: u64) -> bool {
    let mut a: Vec<u64> = x.iter().map(|v| v % ell).collect();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| a[r * n + c] != 0) else {
            return false;
        };
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
        }
        let inv = arith::inv_mod(a[c * n + c], ell).expect("nonzero mod a prime");
        for r in c + 1..n {
            let k = mul_mod(a[r * n + c], inv, ell);
            if k == 0 {
                continue;
            }
            for j in c..n {
                let s = mul_mod(k, a[c * n + j], ell);
                a[r * n + j] = arith::sub_mod(a[r * n + j], s, ell);
            }
        }
    }
    true
}

fn mat_mul_mod(a: &[u64], b: &[u64], n: usize, q: u64) -> Vec<u64> {
    let mut out = vec![0u64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] = (out[i * n + j] + aik * b[k * n + j]) % q;
            }
        }
    }
    out
}

/// Closure of the generators under multiplication, identity first.
fn closure(gens: &[Vec<i64>], n: usize, ell: u64, q: u64) -> Result<Vec<Vec<u64>>, DensityError> {
    let gens: Vec<Vec<u64>> = gens
        .iter()
        .map(|g| g.iter().map(|&x| reduce_i128(x as i128, q)).collect())
        .collect();
    for g in &gens {
        if g.len() != n * n {
            return Err(DensityError::InvalidQuery(format!(
                "generator has {} entries, expected {}",
                g.len(),
                n * n
            )));
        }
        if !unit_det(g, n, ell) {
            return Err(DensityError::InvalidQuery("generator is not invertible".into()));
        }
    }
    let id: Vec<u64> = (0..n * n).map(|i| u64::from(i % (n + 1) == 0)).collect();
    let mut seen: HashSet<Vec<u64>> = HashSet::from([id.clone()]);
    let mut elems = vec![id];
    let mut head = 0;
    while head < elems.len() {
        let x = elems[head].clone();
        head += 1;
        for g in &gens {
            let y = mat_mul_mod(&x, g, n, q);
            if seen.insert(y.clone()) {
                if elems.len() >= CLOSURE_LIMIT {
                    return Err(DensityError::GroupTooLarge(CLOSURE_LIMIT));
                }
                elems.push(y);
            }
        }
    }
    Ok(elems)
}

/// Membership in the tube `v(f) > alpha`, zero counting as infinite valuation.
pub fn in_tube(value: u64, ell: u64, m: u32, alpha: u32) -> bool {
    value == 0 || val_int(value, ell, m) > alpha
}

pub fn in_tube_witt(value: &WittElem, alpha: u32) -> bool {
    value.is_zero() || value.valuation() > alpha
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Enumerate when `|G| <= EXACT_LIMIT`, else sample `DEFAULT_SAMPLES`.
    Auto,
    Exact,
    Sample(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TubeReport {
    pub mode: &'static str,
    pub group_order: u128,
    pub alpha: u32,
    pub hits: u64,
    pub total: u64,
    /// Reduced `hits/total`; exact mode only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fraction: Option<String>,
    pub estimate: f64,
    pub std_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

pub fn reduced_fraction(num: u64, den: u64) -> String {
    if num == 0 {
        return "0/1".to_string();
    }
    let g = gcd(num, den);
    format!("{}/{}", num / g, den / g)
}

enum Population {
    Full { order: u128 },
    Listed(Vec<Vec<u64>>),
}

impl Population {
    fn order(&self) -> u128 {
        match self {
            Population::Full { order } => *order,
            Population::Listed(v) => v.len() as u128,
        }
    }
}

fn population(q: &TubeQuery, modulus: u64) -> Result<Population, DensityError> {
    Ok(match &q.group {
        GroupSpec::Full => Population::Full {
            order: gl_order(q.ell, q.n, q.level).unwrap_or(u128::MAX),
        },
        GroupSpec::Generated { generators } => {
            Population::Listed(closure(generators, q.n, q.ell, modulus)?)
        }
    })
}

/// Seeded generator of the `i`-th partition's stream.
pub fn partition_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn exact_count(q: &TubeQuery, pop: &Population, modulus: u64, exec: ExecMode) -> (u64, u64) {
    let nn = q.n * q.n;
    let hit = |x: &[u64]| in_tube(q.f.eval_mod(x, modulus), q.ell, q.level, q.alpha);
    let add = |a: (u64, u64), b: (u64, u64)| (a.0 + b.0, a.1 + b.1);
    match pop {
        Population::Full { .. } => {
            let tuples = modulus.pow(nn as u32);
            map_reduce(exec, PARTITIONS, (0, 0), |i| {
                let (a, b) = slice(tuples, PARTITIONS, i);
                let mut x = vec![0u64; nn];
                let (mut h, mut t) = (0, 0);
                for code in a..b {
                    let mut c = code;
                    for xi in x.iter_mut() {
                        *xi = c % modulus;
                        c /= modulus;
                    }
                    if unit_det(&x, q.n, q.ell) {
                        t += 1;
                        h += u64::from(hit(&x));
                    }
                }
                (h, t)
            }, add)
        }
        Population::Listed(v) => map_reduce(exec, PARTITIONS, (0, 0), |i| {
            let (a, b) = slice(v.len() as u64, PARTITIONS, i);
            let part = &v[a as usize..b as usize];
            (part.iter().filter(|x| hit(x)).count() as u64, part.len() as u64)
        }, add),
    }
}

fn sampled_count(
    q: &TubeQuery,
    pop: &Population,
    modulus: u64,
    samples: u64,
    seed: u64,
    exec: ExecMode,
) -> u64 {
    let nn = q.n * q.n;
    map_reduce(exec, PARTITIONS, 0, |i| {
        let (a, b) = slice(samples, PARTITIONS, i);
        let mut rng = partition_rng(seed, i);
        let mut x = vec![0u64; nn];
        let mut h = 0;
        for _ in a..b {
            let value = match pop {
                Population::Full { .. } => loop {
                    for xi in x.iter_mut() {
                        *xi = rng.gen_range(0..modulus);
                    }
                    if unit_det(&x, q.n, q.ell) {
                        break q.f.eval_mod(&x, modulus);
                    }
                },
                Population::Listed(v) => q.f.eval_mod(&v[rng.gen_range(0..v.len())], modulus),
            };
            h += u64::from(in_tube(value, q.ell, q.level, q.alpha));
        }
        h
    }, |a, b| a + b)
}

pub fn tube_measure(q: &TubeQuery, mode: Mode, seed: u64) -> Result<TubeReport, DensityError> {
    tube_measure_with(q, mode, seed, ExecMode::Parallel)
}

pub fn tube_measure_with(
    q: &TubeQuery,
    mode: Mode,
    seed: u64,
    exec: ExecMode,
) -> Result<TubeReport, DensityError> {
    let modulus = q.modulus()?;
    let pop = population(q, modulus)?;
    let order = pop.order();
    let mode = match mode {
        Mode::Auto if order <= EXACT_LIMIT => Mode::Exact,
        Mode::Auto => Mode::Sample(DEFAULT_SAMPLES),
        m => m,
    };
    match mode {
        Mode::Exact => {
            if order > EXACT_LIMIT {
                return Err(DensityError::TooLargeToEnumerate {
                    order,
                    limit: EXACT_LIMIT,
                });
            }
            let (hits, total) = exact_count(q, &pop, modulus, exec);
            debug_assert_eq!(total as u128, order);
            Ok(TubeReport {
                mode: "exact",
                group_order: order,
                alpha: q.alpha,
                hits,
                total,
                fraction: Some(reduced_fraction(hits, total)),
                estimate: hits as f64 / total as f64,
                std_error: 0.0,
                seed: None,
            })
        }
        Mode::Sample(n) => {
            if n == 0 {
                return Err(DensityError::InvalidQuery("sample count must be positive".into()));
            }
            let hits = sampled_count(q, &pop, modulus, n, seed, exec);
            let p = hits as f64 / n as f64;
            Ok(TubeReport {
                mode: "sampled",
                group_order: order,
                alpha: q.alpha,
                hits,
                total: n,
                fraction: None,
                estimate: p,
                std_error: (p * (1.0 - p) / n as f64).sqrt(),
                seed: Some(seed),
            })
        }
        Mode::Auto => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanRow {
    pub alpha: u32,
    pub hits: usize,
    pub total: usize,
    pub fraction: String,
}

const INVARIANCE_TRIALS: usize = 32;

fn random_mat(ring: &WittRing, rng: &mut ChaCha8Rng) -> Mat {
    let size = ring.size().unwrap_or(u128::MAX);
    let entries = (0..4)
        .map(|_| ring.element_from_code(rng.gen_range(0..size)))
        .collect();
    Mat::from_elems(ring, entries).expect("four entries")
}

/// `f(g x g^-1) = f(x)` on seeded random `x` and invertible `g`.
pub fn check_conjugation_invariant(ring: &WittRing, f: &Polynomial) -> Result<(), DensityError> {
    f.check(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..INVARIANCE_TRIALS {
        let x = random_mat(ring, &mut rng);
        let g = loop {
            let g = random_mat(ring, &mut rng);
            if g.is_invertible() {
                break g;
            }
        };
        let y = g.mul(&x).mul(&g.inverse().expect("invertible"));
        if f.eval_mat(&x) != f.eval_mat(&y) {
            return Err(DensityError::NotConjugationInvariant);
        }
    }
    Ok(())
}

fn frobenius_values(
    rho: &Deformation,
    places: &[&Place],
    f: &Polynomial,
) -> Result<Vec<WittElem>, DensityError> {
    check_conjugation_invariant(rho.ring(), f)?;
    places
        .iter()
        .map(|v| {
            rho.evaluate(&v.sigma)
                .map(|m| f.eval_mat(&m))
                .map_err(|e| DensityError::InvalidQuery(e.to_string()))
        })
        .collect()
}

fn row(values: &[WittElem], alpha: u32) -> ScanRow {
    let hits = values.iter().filter(|x| in_tube_witt(x, alpha)).count();
    let total = values.len();
    ScanRow {
        alpha,
        hits,
        total,
        fraction: if total == 0 {
            "0/1".into()
        } else {
            reduced_fraction(hits as u64, total as u64)
        },
    }
}

/// Fraction of places whose Frobenius image lies in the tube of `f` at `alpha`.
pub fn frobenius_scan(
    rho: &Deformation,
    places: &[&Place],
    f: &Polynomial,
    alpha: u32,
) -> Result<ScanRow, DensityError> {
    let m = rho.level();
    if alpha > m {
        return Err(DensityError::AlphaExceedsPrecision { alpha, m });
    }
    Ok(row(&frobenius_values(rho, places, f)?, alpha))
}

/// The scan at every `alpha` in `0..=m`.
pub fn frobenius_table(
    rho: &Deformation,
    places: &[&Place],
    f: &Polynomial,
) -> Result<Vec<ScanRow>, DensityError> {
    let values = frobenius_values(rho, places, f)?;
    Ok((0..=rho.level()).map(|a| row(&values, a)).collect())
}
