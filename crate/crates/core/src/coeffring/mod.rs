//! Exact arithmetic in `F_{ell^d}` and in the truncated unramified rings
//! `W(F_{ell^d}) / ell^m`.
//!
//! A ring `W(F_{ell^d})/ell^m` is realised as `(Z/ell^m)[x] / (P)` where `P`
//! is the residue-field modulus with its coefficients read in `Z/ell^m`.
//! The residue field itself is the `m = 1` instance, so [`FFElem`] is the
//! same type as [`WittElem`] over a ring of precision one.

mod embed;
mod factor;
mod field;
pub mod poly;

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::arith::{add_mod, gcd, inv_mod, mul_mod, pow_mod, reduce_i128, sub_mod};

pub use embed::{embed, embed_poly};
pub use factor::ff_factorize;
pub use field::{make_field, FieldParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("ell = {0} is too small, need ell >= 5")]
    EllTooSmall(u64),
    #[error("invalid extension degree {0}")]
    BadDegree(usize),
    #[error("precision ell^m does not fit in 60 bits")]
    PrecisionTooLarge,
    #[error("zero has no inverse")]
    ZeroInverse,
    #[error("element is not a unit")]
    NotAUnit,
    #[error("operands live in different rings: {0} vs {1}")]
    ParamMismatch(String, String),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("residual root is not simple")]
    NotASimpleRoot,
    #[error("{0} does not divide {1}")]
    NonDivisibleDegrees(usize, usize),
    #[error("cannot parse ring element: {0}")]
    Parse(String),
}

const MAX_MODULUS_BITS: u32 = 60;

/// Parameters and caches of `W(F_{ell^d}) / ell^m`.
pub struct RingData {
    ell: u64,
    d: usize,
    m: u32,
    pm: u64,
    /// Monic, length `d + 1`, coefficients in `[0, ell^m)`.
    modulus: Vec<u64>,
    field: FieldParams,
    /// Powers `theta^0 .. theta^{d-1}` of the Frobenius image of `x`.
    frob_powers: OnceLock<Vec<Vec<u64>>>,
}

/// Handle to a truncated Witt ring. Cheap to clone; equal handles describe
/// the same ring.
#[derive(Clone)]
pub struct WittRing(Arc<RingData>);

type RingKey = (u64, usize, u32);

fn ring_table() -> &'static Mutex<HashMap<RingKey, WittRing>> {
    static TABLE: OnceLock<Mutex<HashMap<RingKey, WittRing>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn field_table() -> &'static Mutex<HashMap<(u64, usize), FieldParams>> {
    static TABLE: OnceLock<Mutex<HashMap<(u64, usize), FieldParams>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached_field(ell: u64, d: usize) -> Result<FieldParams, RingError> {
    if let Some(f) = field_table().lock().unwrap().get(&(ell, d)) {
        return Ok(f.clone());
    }
    let f = make_field(ell, d)?;
    field_table()
        .lock()
        .unwrap()
        .entry((ell, d))
        .or_insert(f.clone());
    Ok(f)
}

impl WittRing {
    /// The ring `W(F_{ell^d}) / ell^m`; deterministic and shared.
    pub fn new(ell: u64, d: usize, m: u32) -> Result<Self, RingError> {
        if m == 0 {
            return Err(RingError::BadDegree(0));
        }
        if let Some(r) = ring_table().lock().unwrap().get(&(ell, d, m)) {
            return Ok(r.clone());
        }
        let field = cached_field(ell, d)?;
        let pm = ell
            .checked_pow(m)
            .filter(|p| *p < (1u64 << MAX_MODULUS_BITS))
            .ok_or(RingError::PrecisionTooLarge)?;
        let ring = WittRing(Arc::new(RingData {
            ell,
            d,
            m,
            pm,
            modulus: field.modulus.clone(),
            field,
            frob_powers: OnceLock::new(),
        }));
        // Two threads may race to build the same ring; both results are
        // identical, the first insertion wins.
        let mut table = ring_table().lock().unwrap();
        Ok(table.entry((ell, d, m)).or_insert(ring).clone())
    }

    /// The residue field `F_{ell^d}` (precision one).
    pub fn field(ell: u64, d: usize) -> Result<Self, RingError> {
        Self::new(ell, d, 1)
    }

    pub fn ell(&self) -> u64 {
        self.0.ell
    }
    pub fn degree(&self) -> usize {
        self.0.d
    }
    pub fn precision(&self) -> u32 {
        self.0.m
    }
    /// `ell^m`.
    pub fn modulus_int(&self) -> u64 {
        self.0.pm
    }
    pub fn poly_modulus(&self) -> &[u64] {
        &self.0.modulus
    }
    pub fn field_params(&self) -> &FieldParams {
        &self.0.field
    }
    pub fn is_field(&self) -> bool {
        self.0.m == 1
    }
    pub fn key(&self) -> RingKey {
        (self.0.ell, self.0.d, self.0.m)
    }
    /// Number of elements, when it fits.
    pub fn size(&self) -> Option<u128> {
        (self.0.pm as u128).checked_pow(self.0.d as u32)
    }

    /// Same residue degree, different precision.
    pub fn with_precision(&self, m: u32) -> Result<Self, RingError> {
        Self::new(self.0.ell, self.0.d, m)
    }
    pub fn with_degree(&self, d: usize) -> Result<Self, RingError> {
        Self::new(self.0.ell, d, self.0.m)
    }
    pub fn residue_field(&self) -> WittRing {
        Self::new(self.0.ell, self.0.d, 1).expect("residue field of a valid ring")
    }

    pub fn zero(&self) -> WittElem {
        WittElem {
            ring: self.clone(),
            c: vec![0; self.0.d],
        }
    }
    pub fn one(&self) -> WittElem {
        self.from_int(1)
    }
    pub fn from_int(&self, v: i64) -> WittElem {
        let mut e = self.zero();
        e.c[0] = reduce_i128(v as i128, self.0.pm);
        e
    }
    /// The class of `x`, i.e. the chosen ring generator.
    pub fn gen(&self) -> WittElem {
        let mut e = self.zero();
        if self.0.d == 1 {
            e.c[0] = reduce_i128(-(self.0.modulus[0] as i128), self.0.pm);
        } else {
            e.c[1] = 1;
        }
        e
    }
    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<WittElem, RingError> {
        if coeffs.len() != self.0.d {
            return Err(RingError::Parse(format!(
                "expected {} coefficients, got {}",
                self.0.d,
                coeffs.len()
            )));
        }
        Ok(WittElem {
            ring: self.clone(),
            c: coeffs
                .iter()
                .map(|&v| reduce_i128(v as i128, self.0.pm))
                .collect(),
        })
    }
    pub(crate) fn elem_from_raw(&self, c: Vec<u64>) -> WittElem {
        debug_assert_eq!(c.len(), self.0.d);
        WittElem {
            ring: self.clone(),
            c,
        }
    }

    /// Every element, in increasing coefficient code order. Only sensible for
    /// small rings.
    pub fn elements(&self) -> impl Iterator<Item = WittElem> + '_ {
        let n = self.size().expect("ring too large to enumerate");
        (0..n).map(move |code| self.element_from_code(code))
    }

    /// The element whose coefficients are the base-`ell^m` digits of `code`.
    pub fn element_from_code(&self, mut code: u128) -> WittElem {
        let pm = self.0.pm as u128;
        let c = (0..self.0.d)
            .map(|_| {
                let v = (code % pm) as u64;
                code /= pm;
                v
            })
            .collect();
        self.elem_from_raw(c)
    }

    fn frob_powers(&self) -> &Vec<Vec<u64>> {
        self.0.frob_powers.get_or_init(|| {
            let theta = self.frobenius_of_gen();
            let mut pows = Vec::with_capacity(self.0.d);
            let mut p = self.one();
            for _ in 0..self.0.d {
                pows.push(p.c.clone());
                p = &p * &theta;
            }
            pows
        })
    }

    /// Hensel lift of `x^ell` to a root of the ring modulus.
    fn frobenius_of_gen(&self) -> WittElem {
        let x = self.gen();
        if self.0.d == 1 {
            return x;
        }
        let modpoly: Vec<WittElem> = self
            .0
            .modulus
            .iter()
            .map(|&c| self.from_int(c as i64))
            .collect();
        let start = x.pow(self.0.ell as u128);
        hensel_root(&modpoly, &start).expect("modulus is separable")
    }
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.key() == other.key()
    }
}
impl Eq for WittRing {}
impl Hash for WittRing {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W({}^{}, d={})", self.0.ell, self.0.m, self.0.d)
    }
}

impl fmt::Display for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}:{}", self.0.ell, self.0.m, self.0.d)
    }
}

/// Element of `W(F_{ell^d}) / ell^m`: coefficients of `1, x, .., x^{d-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittElem {
    ring: WittRing,
    c: Vec<u64>,
}

/// Residue-field element: a [`WittElem`] of precision one.
pub type FFElem = WittElem;

impl WittElem {
    pub fn ring(&self) -> &WittRing {
        &self.ring
    }
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }
    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&v| v == 0)
    }
    pub fn is_one(&self) -> bool {
        self.c[0] == 1 % self.ring.0.pm && self.c[1..].iter().all(|&v| v == 0)
    }

    fn check(&self, other: &Self) {
        if self.ring != other.ring {
            panic!(
                "{}",
                RingError::ParamMismatch(self.ring.to_string(), other.ring.to_string())
            );
        }
    }

    pub fn same_ring(&self, other: &Self) -> Result<(), RingError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(RingError::ParamMismatch(
                self.ring.to_string(),
                other.ring.to_string(),
            ))
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let pm = self.ring.0.pm;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| add_mod(a, b, pm))
            .collect();
        self.ring.elem_from_raw(c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        let pm = self.ring.0.pm;
        let c = self
            .c
            .iter()
            .zip(&other.c)
            .map(|(&a, &b)| sub_mod(a, b, pm))
            .collect();
        self.ring.elem_from_raw(c)
    }

    pub fn neg(&self) -> Self {
        let pm = self.ring.0.pm;
        let c = self.c.iter().map(|&a| sub_mod(0, a, pm)).collect();
        self.ring.elem_from_raw(c)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let r = &self.ring.0;
        let (d, pm) = (r.d, r.pm);
        if d == 1 {
            return self.ring.elem_from_raw(vec![mul_mod(self.c[0], other.c[0], pm)]);
        }
        let mut prod = vec![0u64; 2 * d - 1];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.c.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(a, b, pm), pm);
            }
        }
        for k in (d..2 * d - 1).rev() {
            let t = prod[k];
            if t == 0 {
                continue;
            }
            prod[k] = 0;
            for i in 0..d {
                prod[k - d + i] = sub_mod(prod[k - d + i], mul_mod(t, r.modulus[i], pm), pm);
            }
        }
        prod.truncate(d);
        self.ring.elem_from_raw(prod)
    }

    pub fn scale_int(&self, k: i64) -> Self {
        let pm = self.ring.0.pm;
        let kk = reduce_i128(k as i128, pm);
        let c = self.c.iter().map(|&a| mul_mod(a, kk, pm)).collect();
        self.ring.elem_from_raw(c)
    }

    pub fn pow(&self, mut e: u128) -> Self {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Reduction modulo `ell`, as an element of the residue field.
    pub fn residue(&self) -> FFElem {
        self.reduce_to(1).expect("precision 1 always valid")
    }

    /// A unit iff its residue is nonzero.
    pub fn is_unit(&self) -> bool {
        let ell = self.ring.0.ell;
        self.c.iter().any(|&v| v % ell != 0)
    }

    /// `ell`-adic valuation; the precision `m` for zero.
    pub fn valuation(&self) -> u32 {
        let r = &self.ring.0;
        self.c
            .iter()
            .map(|&v| crate::arith::val_int(v, r.ell, r.m))
            .min()
            .unwrap_or(r.m)
    }

    pub fn inv(&self) -> Result<Self, RingError> {
        if self.is_zero() {
            return Err(RingError::ZeroInverse);
        }
        if !self.is_unit() {
            return Err(RingError::NotAUnit);
        }
        let r = &self.ring.0;
        let q = (r.ell as u128).pow(r.d as u32);
        let res = self.residue();
        let res_inv = if r.d == 1 {
            let v = inv_mod(res.c[0], r.ell).ok_or(RingError::ZeroInverse)?;
            res.ring.elem_from_raw(vec![v])
        } else {
            res.pow(q - 2)
        };
        let mut y = res_inv.lift_to(r.m)?;
        // Newton: y <- y (2 - x y) doubles the number of correct digits.
        let two = self.ring.from_int(2);
        let mut prec = 1;
        while prec < r.m {
            y = y.mul(&two.sub(&self.mul(&y)));
            prec *= 2;
        }
        debug_assert!(self.mul(&y).is_one());
        Ok(y)
    }

    /// Reduction to a lower precision.
    pub fn reduce_to(&self, m: u32) -> Result<Self, RingError> {
        let target = self.ring.with_precision(m)?;
        if m > self.ring.0.m {
            return Err(RingError::ParamMismatch(
                self.ring.to_string(),
                target.to_string(),
            ));
        }
        let pm = target.0.pm;
        Ok(target.elem_from_raw(self.c.iter().map(|&v| v % pm).collect()))
    }

    /// Coefficient-wise lift to a higher precision (representatives kept).
    pub fn lift_to(&self, m: u32) -> Result<Self, RingError> {
        if m < self.ring.0.m {
            return self.reduce_to(m);
        }
        let target = self.ring.with_precision(m)?;
        Ok(target.elem_from_raw(self.c.clone()))
    }

    /// Multiplies by `ell^k`, moving to precision `m + k` is the caller's job;
    /// here the ring is unchanged.
    pub fn times_ell_pow(&self, k: u32) -> Self {
        let r = &self.ring.0;
        let f = pow_mod(r.ell, k as u128, r.pm);
        let c = self.c.iter().map(|&v| mul_mod(v, f, r.pm)).collect();
        self.ring.elem_from_raw(c)
    }

    /// Exact division by `ell^k`, read in precision `m - k`.
    pub fn div_ell_pow(&self, k: u32) -> Result<Self, RingError> {
        let r = &self.ring.0;
        if k >= r.m || self.valuation() < k {
            return Err(RingError::NotAUnit);
        }
        let e = r.ell.pow(k);
        let target = self.ring.with_precision(r.m - k)?;
        Ok(target.elem_from_raw(self.c.iter().map(|&v| v / e).collect()))
    }

    /// Canonical Frobenius lift.
    pub fn frobenius(&self) -> Self {
        let r = &self.ring.0;
        if r.d == 1 {
            return self.clone();
        }
        let pows = self.ring.frob_powers();
        let mut out = vec![0u64; r.d];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (k, &t) in pows[i].iter().enumerate() {
                out[k] = add_mod(out[k], mul_mod(a, t, r.pm), r.pm);
            }
        }
        self.ring.elem_from_raw(out)
    }

    pub fn frobenius_pow(&self, k: usize) -> Self {
        let d = self.ring.0.d;
        let mut x = self.clone();
        for _ in 0..(k % d) {
            x = x.frobenius();
        }
        x
    }

    /// Membership in `W(F_{ell^{d0}})/ell^m`, for any `d0 >= 1`: the fixed ring
    /// of `Frobenius^{gcd(d0, d)}`.
    pub fn in_subring_gcd(&self, d0: usize) -> bool {
        let g = gcd(d0 as u64, self.ring.0.d as u64) as usize;
        self.frobenius_pow(g) == *self
    }

    /// Canonical text form `ell^m:d:[c_0,...,c_{d-1}]`.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Self, RingError> {
        let err = || RingError::Parse(s.to_string());
        let (head, rest) = s.trim().split_once('^').ok_or_else(err)?;
        let mut parts = rest.splitn(3, ':');
        let m = parts.next().ok_or_else(err)?;
        let d = parts.next().ok_or_else(err)?;
        let body = parts.next().ok_or_else(err)?;
        let ell: u64 = head.parse().map_err(|_| err())?;
        let m: u32 = m.parse().map_err(|_| err())?;
        let d: usize = d.parse().map_err(|_| err())?;
        let body = body
            .strip_prefix('[')
            .and_then(|b| b.strip_suffix(']'))
            .ok_or_else(err)?;
        let ring = WittRing::new(ell, d, m)?;
        let c: Vec<u64> = if body.is_empty() {
            Vec::new()
        } else {
            body.split(',')
                .map(|t| t.trim().parse::<u64>().map_err(|_| err()))
                .collect::<Result<_, _>>()?
        };
        if c.len() != d || c.iter().any(|&v| v >= ring.0.pm) {
            return Err(err());
        }
        Ok(ring.elem_from_raw(c))
    }

    /// Numeric code of the coefficient vector, used as a canonical order.
    pub fn code(&self) -> u128 {
        let pm = self.ring.0.pm as u128;
        self.c.iter().rev().fold(0u128, |acc, &v| acc * pm + v as u128)
    }
}

impl fmt::Display for WittElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.ring.0;
        write!(f, "{}^{}:{}:[", r.ell, r.m, r.d)?;
        for (i, v) in self.c.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for WittElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialOrd for WittElem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Orders by ring, then coefficients from the constant term upward.
impl Ord for WittElem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.ring
            .key()
            .cmp(&other.ring.key())
            .then_with(|| self.c.cmp(&other.c))
    }
}

impl serde::Serialize for WittElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for WittElem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        WittElem::parse(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl std::ops::$tr<&WittElem> for &WittElem {
            type Output = WittElem;
            fn $f(self, rhs: &WittElem) -> WittElem {
                WittElem::$f(self, rhs)
            }
        }
        impl std::ops::$tr<WittElem> for WittElem {
            type Output = WittElem;
            fn $f(self, rhs: WittElem) -> WittElem {
                WittElem::$f(&self, &rhs)
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl std::ops::Neg for &WittElem {
    type Output = WittElem;
    fn neg(self) -> WittElem {
        WittElem::neg(self)
    }
}

/// Field operations selected at runtime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Pow(u128),
}

/// Checked field arithmetic; `b` is ignored for `Inv` and `Pow`.
pub fn ff_arith(a: &FFElem, b: &FFElem, op: FieldOp) -> Result<FFElem, RingError> {
    a.same_ring(b)?;
    match op {
        FieldOp::Add => Ok(a + b),
        FieldOp::Mul => Ok(a * b),
        FieldOp::Inv => a.inv(),
        FieldOp::Pow(e) => Ok(a.pow(e)),
    }
}

/// Teichmuller lift of a residue-field element to precision `m`.
///
/// Iterates `y -> y^{ell^d}` from the coefficient-wise lift until stable.
pub fn teichmuller(a: &FFElem, m: u32) -> Result<WittElem, RingError> {
    let q = (a.ring.0.ell as u128).pow(a.ring.0.d as u32);
    let mut y = a.residue().lift_to(m)?;
    loop {
        let next = y.pow(q);
        if next == y {
            return Ok(y);
        }
        y = next;
    }
}

/// Frobenius lift, as a free function.
pub fn witt_frobenius(x: &WittElem) -> WittElem {
    x.frobenius()
}

/// `x` lies in the image of `W(F_{ell^{d0}})/ell^m`; requires `d0 | d`.
pub fn in_subring(x: &WittElem, d0: usize) -> Result<bool, RingError> {
    let d = x.ring.0.d;
    if d0 == 0 || !d.is_multiple_of(d0) {
        return Err(RingError::NonDivisibleDegrees(d0, d));
    }
    Ok(x.frobenius_pow(d0) == *x)
}

/// Unique root of `poly` congruent to `rbar` mod `ell`, by Newton iteration.
///
/// `poly` has coefficients in the target ring, low degree first; `rbar` may
/// be given at any precision, only its residue matters.
pub fn hensel_root(poly: &[WittElem], rbar: &WittElem) -> Result<WittElem, RingError> {
    let ring = poly.first().ok_or(RingError::ZeroPolynomial)?.ring.clone();
    let mut r = rbar.residue().lift_to(ring.0.m)?;
    r.same_ring(&poly[0])?;
    let dpoly = poly::derivative(poly);
    if !poly::eval(poly, &r).residue().is_zero() {
        return Err(RingError::NotASimpleRoot);
    }
    let dv = poly::eval(&dpoly, &r);
    if !dv.is_unit() {
        return Err(RingError::NotASimpleRoot);
    }
    for _ in 0..=64 {
        let v = poly::eval(poly, &r);
        if v.is_zero() {
            return Ok(r);
        }
        let dv = poly::eval(&dpoly, &r);
        r = &r - &(&v * &dv.inv()?);
    }
    unreachable!("Newton iteration converges within the precision")
}

#[cfg(test)]
mod tests;
