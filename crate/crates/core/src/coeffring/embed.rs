//! Ring embeddings `W(F_{ell^d})/ell^m -> W(F_{ell^{d'}})/ell^m` for `d | d'`.
//!
//! A prime-degree step `d -> d p` sends `x` to the Hensel lift of the smallest
//! residual root of the small modulus inside the big field. A general
//! embedding walks the chain obtained by multiplying in the prime factors of
//! `d'/d` in ascending order, so every power-of-a-prime chain composes
//! consistently.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::{ff_factorize, hensel_root, poly, RingError, WittElem, WittRing};
use crate::arith::prime_factors;

type StepKey = (u64, usize, usize, u32);

fn step_table() -> &'static Mutex<HashMap<StepKey, Vec<Vec<u64>>>> {
    static TABLE: OnceLock<Mutex<HashMap<StepKey, Vec<Vec<u64>>>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Images of `1, x, .., x^{d-1}` under the step embedding.
fn step_powers(small: &WittRing, big: &WittRing) -> Result<Vec<Vec<u64>>, RingError> {
    let key = (small.ell(), small.degree(), big.degree(), small.precision());
    if let Some(p) = step_table().lock().unwrap().get(&key) {
        return Ok(p.clone());
    }
    let big_field = big.residue_field();
    let modulus_res: Vec<WittElem> = small
        .poly_modulus()
        .iter()
        .map(|&c| big_field.from_int(c as i64))
        .collect();
    let root_res = ff_factorize(&modulus_res)?
        .into_iter()
        .filter(|(f, _)| f.len() == 2)
        .map(|(f, _)| -&f[0])
        .min()
        .expect("the small modulus splits in the big field");
    let modulus_big: Vec<WittElem> = small
        .poly_modulus()
        .iter()
        .map(|&c| big.from_int(c as i64))
        .collect();
    let theta = hensel_root(&modulus_big, &root_res)?;
    let mut pows = Vec::with_capacity(small.degree());
    let mut p = big.one();
    for _ in 0..small.degree() {
        pows.push(p.coeffs().to_vec());
        p = &p * &theta;
    }
    step_table()
        .lock()
        .unwrap()
        .entry(key)
        .or_insert(pows.clone());
    Ok(pows)
}

fn apply_step(x: &WittElem, big: &WittRing) -> Result<WittElem, RingError> {
    let pows = step_powers(x.ring(), big)?;
    let pm = big.modulus_int();
    let mut out = vec![0u64; big.degree()];
    for (i, &a) in x.coeffs().iter().enumerate() {
        if a == 0 {
            continue;
        }
        for (k, &t) in pows[i].iter().enumerate() {
            out[k] = crate::arith::add_mod(out[k], crate::arith::mul_mod(a, t, pm), pm);
        }
    }
    Ok(big.elem_from_raw(out))
}

/// Embeds `x` into the ring of residue degree `d2` at the same precision.
pub fn embed(x: &WittElem, d2: usize) -> Result<WittElem, RingError> {
    let d = x.ring().degree();
    if d2 == 0 || !d2.is_multiple_of(d) {
        return Err(RingError::NonDivisibleDegrees(d, d2));
    }
    let mut cur = x.clone();
    let mut deg = d;
    let mut rest = d2 / d;
    for p in prime_factors((d2 / d) as u64) {
        while rest.is_multiple_of(p as usize) {
            let next = deg * p as usize;
            let big = cur.ring().with_degree(next)?;
            cur = apply_step(&cur, &big)?;
            deg = next;
            rest /= p as usize;
        }
    }
    Ok(cur)
}

/// Embeds a polynomial coefficient-wise.
pub fn embed_poly(p: &[WittElem], d2: usize) -> Result<poly::Poly, RingError> {
    p.iter().map(|c| embed(c, d2)).collect()
}
