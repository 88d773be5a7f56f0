//! Dense univariate polynomials with [`WittElem`] coefficients, low degree
//! first. Division routines assume a field (precision one) or a unit
//! leading coefficient.

use super::{RingError, WittElem, WittRing};

pub type Poly = Vec<WittElem>;

pub fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

pub fn is_zero(p: &[WittElem]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Degree, `None` for the zero polynomial.
pub fn degree(p: &[WittElem]) -> Option<usize> {
    p.iter().rposition(|c| !c.is_zero())
}

pub fn eval(p: &[WittElem], x: &WittElem) -> WittElem {
    let mut acc = x.ring().zero();
    for c in p.iter().rev() {
        acc = &(&acc * x) + c;
    }
    acc
}

pub fn derivative(p: &[WittElem]) -> Poly {
    if p.len() <= 1 {
        return vec![p[0].ring().zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c.scale_int(i as i64))
        .collect()
}

pub fn add(a: &[WittElem], b: &[WittElem]) -> Poly {
    let n = a.len().max(b.len());
    let ring = a.first().or(b.first()).expect("nonempty").ring().clone();
    let mut out: Poly = (0..n)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => x + y,
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => ring.zero(),
        })
        .collect();
    trim(&mut out);
    out
}

pub fn sub(a: &[WittElem], b: &[WittElem]) -> Poly {
    let nb: Poly = b.iter().map(|c| -c).collect();
    add(a, &nb)
}

pub fn mul(a: &[WittElem], b: &[WittElem]) -> Poly {
    let ring = a[0].ring().clone();
    let mut out = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    trim(&mut out);
    out
}

pub fn scale(a: &[WittElem], s: &WittElem) -> Poly {
    let mut out: Poly = a.iter().map(|c| c * s).collect();
    trim(&mut out);
    out
}

/// Polynomial from integer coefficients.
pub fn from_ints(ring: &WittRing, coeffs: &[i64]) -> Poly {
    let mut p: Poly = coeffs.iter().map(|&c| ring.from_int(c)).collect();
    trim(&mut p);
    p
}

/// Quotient and remainder; the divisor must have a unit leading coefficient.
pub fn divrem(a: &[WittElem], b: &[WittElem]) -> Result<(Poly, Poly), RingError> {
    let db = degree(b).ok_or(RingError::ZeroPolynomial)?;
    let ring = b[0].ring().clone();
    let lead_inv = b[db].inv()?;
    let mut r: Poly = a.to_vec();
    trim(&mut r);
    let da = degree(&r);
    let mut q = vec![ring.zero(); da.map_or(1, |d| d.saturating_sub(db) + 1)];
    while let Some(dr) = degree(&r) {
        if dr < db {
            break;
        }
        let c = &r[dr] * &lead_inv;
        let shift = dr - db;
        for (i, bi) in b.iter().enumerate().take(db + 1) {
            r[shift + i] = &r[shift + i] - &(&c * bi);
        }
        q[shift] = c;
        trim(&mut r);
    }
    trim(&mut q);
    trim(&mut r);
    Ok((q, r))
}

pub fn rem(a: &[WittElem], b: &[WittElem]) -> Result<Poly, RingError> {
    Ok(divrem(a, b)?.1)
}

/// Monic normalisation (field coefficients).
pub fn monic(a: &[WittElem]) -> Result<Poly, RingError> {
    let d = degree(a).ok_or(RingError::ZeroPolynomial)?;
    let inv = a[d].inv()?;
    Ok(scale(&a[..=d], &inv))
}

/// Monic gcd over a field; `gcd(0, 0) = 0`.
pub fn gcd(a: &[WittElem], b: &[WittElem]) -> Result<Poly, RingError> {
    let mut x: Poly = a.to_vec();
    let mut y: Poly = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !is_zero(&y) {
        let r = rem(&x, &y)?;
        x = y;
        y = r;
    }
    if is_zero(&x) {
        return Ok(x);
    }
    monic(&x)
}

/// `base^e mod m`.
pub fn powmod(base: &[WittElem], mut e: u128, m: &[WittElem]) -> Result<Poly, RingError> {
    let ring = m[0].ring().clone();
    let mut acc = vec![ring.one()];
    let mut b = rem(base, m)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = rem(&mul(&acc, &b), m)?;
        }
        b = rem(&mul(&b, &b), m)?;
        e >>= 1;
    }
    Ok(acc)
}

pub fn is_one(p: &[WittElem]) -> bool {
    degree(p) == Some(0) && p[0].is_one()
}
