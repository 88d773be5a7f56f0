//! Factorisation over `F_{ell^d}`: square-free split, distinct-degree split,
//! then Cantor-Zassenhaus equal-degree splitting driven by a fixed-seed
//! stream so results are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{self, Poly};
use super::{RingError, WittElem};

const SPLIT_SEED: u64 = 0x5eed_f00d;

/// Irreducible monic factors with multiplicities, sorted by degree and then
/// coefficient order. The input is only required to be nonzero; its leading
/// coefficient is discarded.
pub fn ff_factorize(p: &[WittElem]) -> Result<Vec<(Poly, usize)>, RingError> {
    let deg = poly::degree(p).ok_or(RingError::ZeroPolynomial)?;
    let ring = p[0].ring().clone();
    if !ring.is_field() {
        return Err(RingError::ParamMismatch(
            ring.to_string(),
            "a residue field".into(),
        ));
    }
    if deg == 0 {
        return Ok(Vec::new());
    }
    let f = poly::monic(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
    let mut out = Vec::new();
    for (sq, mult) in squarefree(&f)? {
        for (g, d) in distinct_degree(&sq)? {
            for h in equal_degree(&g, d, &mut rng)? {
                out.push((h, mult));
            }
        }
    }
    out.sort_by(|(a, ma), (b, mb)| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.cmp(b))
            .then(ma.cmp(mb))
    });
    Ok(out)
}

fn field_order(ring: &super::WittRing) -> u128 {
    (ring.ell() as u128).pow(ring.degree() as u32)
}

fn squarefree(f: &[WittElem]) -> Result<Vec<(Poly, usize)>, RingError> {
    let ring = f[0].ring().clone();
    let ell = ring.ell() as usize;
    let mut out = Vec::new();
    let df = poly::derivative(f);
    let mut c = poly::gcd(f, &df)?;
    if poly::is_zero(&c) {
        c = vec![ring.one()];
    }
    let mut w = poly::divrem(f, &c)?.0;
    let mut i = 1;
    while !poly::is_one(&w) {
        let y = poly::gcd(&w, &c)?;
        let fac = poly::divrem(&w, &y)?.0;
        if !poly::is_one(&fac) {
            out.push((fac, i));
        }
        w = y.clone();
        c = poly::divrem(&c, &y)?.0;
        i += 1;
    }
    if !poly::is_one(&c) {
        // c is a polynomial in x^ell
        let root_exp = field_order(&ring) / ring.ell() as u128;
        let root: Poly = c
            .iter()
            .step_by(ell)
            .map(|a| a.pow(root_exp))
            .collect();
        for (g, j) in squarefree(&root)? {
            out.push((g, j * ell));
        }
    }
    Ok(out)
}

fn x_poly(ring: &super::WittRing) -> Poly {
    vec![ring.zero(), ring.one()]
}

fn distinct_degree(f: &[WittElem]) -> Result<Vec<(Poly, usize)>, RingError> {
    let ring = f[0].ring().clone();
    let q = field_order(&ring);
    let mut out = Vec::new();
    let mut rest: Poly = f.to_vec();
    let x = x_poly(&ring);
    let mut h = x.clone();
    let mut i = 0;
    while let Some(dr) = poly::degree(&rest) {
        if dr < 2 * (i + 1) {
            if dr > 0 {
                out.push((rest.clone(), dr));
            }
            break;
        }
        i += 1;
        h = poly::powmod(&h, q, &rest)?;
        let g = poly::gcd(&rest, &poly::sub(&h, &x))?;
        if !poly::is_one(&g) {
            rest = poly::divrem(&rest, &g)?.0;
            h = poly::rem(&h, &rest)?;
            out.push((g, i));
        }
    }
    Ok(out)
}

fn equal_degree(f: &[WittElem], d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Poly>, RingError> {
    let n = poly::degree(f).unwrap_or(0);
    if n == d {
        return Ok(vec![f.to_vec()]);
    }
    let ring = f[0].ring().clone();
    let q = field_order(&ring);
    let exp = (q.pow(d as u32) - 1) / 2;
    loop {
        let a: Poly = (0..n)
            .map(|_| {
                let code = rng.gen_range(0..q);
                ring.element_from_code(code)
            })
            .collect();
        if poly::degree(&a).unwrap_or(0) == 0 {
            continue;
        }
        let b = poly::sub(&poly::powmod(&a, exp, f)?, &[ring.one()]);
        let g = poly::gcd(f, &b)?;
        let dg = poly::degree(&g).unwrap_or(0);
        if dg > 0 && dg < n {
            let other = poly::divrem(f, &g)?.0;
            let mut out = equal_degree(&g, d, rng)?;
            out.extend(equal_degree(&other, d, rng)?);
            return Ok(out);
        }
    }
}
