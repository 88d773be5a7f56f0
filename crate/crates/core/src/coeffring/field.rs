//! Prime-field polynomial helpers used to pick residue-field moduli.

use super::RingError;
use crate::arith::{add_mod, inv_mod, is_prime, mul_mod, sub_mod};
use serde::{Deserialize, Serialize};

/// Parameters of the residue field `F_{ell^d}`.
///
/// `modulus` is monic of degree `d`, stored low degree first with the
/// leading 1 included (length `d + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldParams {
    pub ell: u64,
    pub d: usize,
    pub modulus: Vec<u64>,
}

impl FieldParams {
    pub fn order(&self) -> u128 {
        (self.ell as u128).pow(self.d as u32)
    }
}

/// Builds `F_{ell^d}` with the smallest monic irreducible modulus.
///
/// Candidates `x^d + c_{d-1} x^{d-1} + ... + c_0` are ordered by the
/// integer `sum c_i ell^i`.
pub fn make_field(ell: u64, d: usize) -> Result<FieldParams, RingError> {
    if !is_prime(ell) {
        return Err(RingError::NotPrime(ell));
    }
    if ell <= 3 {
        return Err(RingError::EllTooSmall(ell));
    }
    if d == 0 {
        return Err(RingError::BadDegree(d));
    }
    let modulus = smallest_irreducible(ell, d);
    Ok(FieldParams { ell, d, modulus })
}

pub(crate) fn smallest_irreducible(p: u64, d: usize) -> Vec<u64> {
    let mut code: u128 = 0;
    loop {
        let mut c = Vec::with_capacity(d + 1);
        let mut k = code;
        for _ in 0..d {
            c.push((k % p as u128) as u64);
            k /= p as u128;
        }
        c.push(1);
        if is_irreducible_mod_p(&c, p) {
            return c;
        }
        code += 1;
    }
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p).expect("nonzero leading coefficient");
    while r.len() > df {
        let k = r.len() - 1;
        let c = mul_mod(r[k], lead_inv, p);
        let shift = k - df;
        for (i, &fi) in f.iter().enumerate() {
            r[shift + i] = sub_mod(r[shift + i], mul_mod(c, fi, p), p);
        }
        trim(&mut r);
    }
    r
}

fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
        }
    }
    out
}

fn gcd_poly(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Rabin-style test: `f` of degree `d` is irreducible iff
/// `gcd(x^{p^i} - x, f) = 1` for all `i <= d/2`.
pub(crate) fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let d = f.len() - 1;
    if d == 1 {
        return true;
    }
    if f[0] == 0 {
        return false;
    }
    let mut h = vec![0, 1];
    for _ in 0..d / 2 {
        // h <- h^p mod f
        let mut acc = vec![1];
        let mut base = h.clone();
        let mut e = p;
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &base, p), f, p);
            }
            base = rem(&mul(&base, &base, p), f, p);
            e >>= 1;
        }
        h = acc;
        let mut hx = h.clone();
        if hx.len() < 2 {
            hx.resize(2, 0);
        }
        hx[1] = sub_mod(hx[1], 1, p);
        let g = gcd_poly(&hx, f, p);
        if g.len() > 1 {
            return false;
        }
    }
    true
}
