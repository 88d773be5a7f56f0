//! Characteristic polynomials, eigenvalues, Hensel diagonalisation, the
//! multiplicative Jordan decomposition and the tame-relation dichotomy.

use super::{Mat, MatError};
use crate::arith::lcm;
use crate::coeffring::{embed_poly, ff_factorize, hensel_root, poly::Poly, WittElem};

/// `det(x I - A)`, low degree first, by Berkowitz's division-free recursion.
pub fn char_poly(a: &Mat) -> Poly {
    let ring = a.ring().clone();
    let n = a.dim();
    // Coefficients highest degree first while iterating.
    let mut p: Vec<WittElem> = vec![ring.one(), -a.get(n - 1, n - 1)];
    for k in (0..n - 1).rev() {
        // Leading block is rows/cols k..n; split off row and column k.
        let size = n - k - 1;
        let a_kk = a.get(k, k).clone();
        let r: Vec<WittElem> = (k + 1..n).map(|j| a.get(k, j).clone()).collect();
        let mut c: Vec<WittElem> = (k + 1..n).map(|i| a.get(i, k).clone()).collect();
        let sub = |v: &[WittElem]| -> Vec<WittElem> {
            (0..size)
                .map(|i| {
                    let mut acc = ring.zero();
                    for (j, x) in v.iter().enumerate() {
                        acc = &acc + &(a.get(k + 1 + i, k + 1 + j) * x);
                    }
                    acc
                })
                .collect()
        };
        let mut col = vec![ring.one(), -&a_kk];
        for _ in 0..size {
            let rc = r
                .iter()
                .zip(&c)
                .fold(ring.zero(), |acc, (x, y)| &acc + &(x * y));
            col.push(-&rc);
            c = sub(&c);
        }
        // Toeplitz product: (size+2) x (size+1) lower triangular.
        let mut next = Vec::with_capacity(size + 2);
        for i in 0..size + 2 {
            let mut acc = ring.zero();
            for (j, pj) in p.iter().enumerate() {
                if i >= j {
                    acc = &acc + &(&col[i - j] * pj);
                }
            }
            next.push(acc);
        }
        p = next;
    }
    p.reverse();
    p
}

/// An eigenvalue of a matrix over `W(F_{ell^d})/ell^m`.
///
/// `value` lives over `F_{ell^{d k}}` where `k = ext_degree` is the degree of
/// the residual irreducible factor it comes from. It is the Hensel lift when
/// the residual root is simple (or `m = 1`); otherwise only the residue is
/// meaningful and `lifted` is false.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigenvalue {
    pub value: WittElem,
    pub residual: WittElem,
    pub multiplicity: usize,
    pub ext_degree: usize,
    pub lifted: bool,
}

/// Characteristic polynomial and eigenvalues, sorted by extension degree and
/// then residue.
pub fn char_poly_eigs(g: &Mat) -> Result<(Poly, Vec<Eigenvalue>), MatError> {
    let cp = char_poly(g);
    let ring = g.ring();
    let d = ring.degree();
    let m = ring.precision();
    let res: Poly = cp.iter().map(|c| c.residue()).collect();
    let mut out = Vec::new();
    for (f, mult) in ff_factorize(&res)? {
        let k = f.len() - 1;
        let (big_cp, roots) = if k == 1 {
            (cp.clone(), vec![-&f[0]])
        } else {
            let fb = embed_poly(&f, d * k)?;
            let roots = ff_factorize(&fb)?
                .into_iter()
                .map(|(h, _)| -&h[0])
                .collect();
            (embed_poly(&cp, d * k)?, roots)
        };
        for r in roots {
            let lifted = mult == 1 || m == 1;
            let value = if mult == 1 {
                hensel_root(&big_cp, &r)?
            } else {
                r.clone()
            };
            out.push(Eigenvalue {
                value,
                residual: r,
                multiplicity: mult,
                ext_degree: k,
                lifted,
            });
        }
    }
    out.sort_by(|a, b| {
        a.ext_degree
            .cmp(&b.ext_degree)
            .then_with(|| a.residual.cmp(&b.residual))
    });
    Ok((cp, out))
}

/// Exact eigenvector of `g` for a root `lam` of its characteristic polynomial
/// with residually rank-one `g - lam`: a column of the adjugate carrying a
/// unit entry.
fn eigenvector(g: &Mat, lam: &WittElem, prefer: usize) -> Vec<WittElem> {
    let ring = g.ring();
    let shifted = g.sub(&Mat::identity(ring, 2).scale(lam));
    let adj = shifted.adjugate();
    let col = (0..2)
        .map(|j| adj.column(j))
        .find(|c| c.iter().any(|x| x.is_unit()))
        .expect("residual rank one gives a nonzero adjugate");
    let idx = if col[prefer].is_unit() { prefer } else { 1 - prefer };
    let s = col[idx].inv().expect("unit entry");
    col.iter().map(|x| x * &s).collect()
}

/// `g = P D P^{-1}` with `D` diagonal, for `2 x 2` `g` whose residual
/// eigenvalues are distinct and in the residue field.
///
/// The first eigenvalue is the one whose residual eigenvector has a nonzero
/// first coordinate (ties broken by residue order). Eigenvectors are scaled
/// so that `P` is the identity on diagonal input.
pub fn hensel_diagonalize(g: &Mat) -> Result<(Mat, Mat), MatError> {
    if g.dim() != 2 {
        return Err(MatError::DimensionMismatch(g.dim(), 2));
    }
    let (_, eigs) = char_poly_eigs(g)?;
    if eigs.iter().any(|e| e.ext_degree > 1) {
        return Err(MatError::EigenvaluesNotInField);
    }
    if eigs.len() != 2 || eigs[0].multiplicity > 1 {
        return Err(MatError::RepeatedResidualEigenvalues);
    }
    let vecs: Vec<Vec<WittElem>> = eigs
        .iter()
        .map(|e| eigenvector(g, &e.value, 0))
        .collect();
    let leads: Vec<bool> = vecs.iter().map(|v| v[0].is_unit()).collect();
    let order = if !leads[0] && leads[1] { [1, 0] } else { [0, 1] };
    let v1 = vecs[order[0]].clone();
    let v2 = eigenvector(g, &eigs[order[1]].value, 1);
    let ring = g.ring();
    let p = Mat::from_columns(ring, &[v1, v2]);
    let dm = Mat::diag(
        ring,
        &[eigs[order[0]].value.clone(), eigs[order[1]].value.clone()],
    );
    debug_assert_eq!(p.mul(&dm).mul(&p.inverse()?), *g);
    Ok((p, dm))
}

fn inv_mod_u128(a: u128, m: u128) -> Option<u128> {
    let (mut t, mut nt) = (0i128, 1i128);
    let (mut r, mut nr) = (m as i128, (a % m) as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u128)
}

/// Multiplicative Jordan decomposition `y = y_s y_u` over a finite field.
///
/// Uses `y_s = y^k` with `k = ell^A u`, where `ell^A >= n` kills every
/// unipotent part and `ell^A u = 1` modulo `lcm(q^i - 1, i <= n)`, a multiple
/// of the order of every semisimple element.
pub fn jordan_decompose(y: &Mat) -> Result<(Mat, Mat), MatError> {
    let ring = y.ring();
    if !ring.is_field() {
        return Err(MatError::NotAField(ring.to_string()));
    }
    let n = y.dim();
    let yinv = y.inverse()?;
    let ell = ring.ell() as u128;
    let q = ell.pow(ring.degree() as u32);
    let mut big_n: u128 = 1;
    for i in 1..=n as u32 {
        let qi = q.pow(i) - 1;
        big_n = big_n / gcd128(big_n, qi) * qi;
    }
    let mut la: u128 = 1;
    while la < n as u128 {
        la *= ell;
    }
    let u = inv_mod_u128(la % big_n, big_n).expect("ell is prime to q^i - 1");
    let k = la * u;
    let ys = y.pow(k);
    let yu = ys.inverse()?.mul(y);
    debug_assert_eq!(yinv.mul(&ys), ys.mul(&yinv));
    Ok((ys, yu))
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Outcome of the tame-relation dichotomy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TameBranch {
    NotConjugateRelation,
    SemisimpleFiniteOrder,
    /// Eigenvalues of `x` over the splitting field with `l1 = q l2`.
    EigenvalueRatio(WittElem, WittElem),
}

/// Classifies `(x, y)` with `x y x^{-1} = y^q` over a finite field: either
/// `y` is semisimple (hence of finite order) or `x` has an eigenvalue pair
/// of ratio `q`.
pub fn check_tame_relation(x: &Mat, y: &Mat, q: u64) -> Result<TameBranch, MatError> {
    let ring = x.ring();
    if !ring.is_field() {
        return Err(MatError::NotAField(ring.to_string()));
    }
    let xinv = x.inverse()?;
    if !y.is_invertible() {
        return Err(MatError::Singular);
    }
    if x.mul(y).mul(&xinv) != y.pow(q as u128) {
        return Ok(TameBranch::NotConjugateRelation);
    }
    let (_, yu) = jordan_decompose(y)?;
    if yu.is_identity() {
        return Ok(TameBranch::SemisimpleFiniteOrder);
    }
    let roots = split_roots(x)?;
    let big = roots[0].ring().clone();
    let qb = big.from_int((q % ring.ell()) as i64);
    for (i, l1) in roots.iter().enumerate() {
        for (j, l2) in roots.iter().enumerate() {
            if i != j && *l1 == &qb * l2 {
                return Ok(TameBranch::EigenvalueRatio(l1.clone(), l2.clone()));
            }
        }
    }
    Err(MatError::NoEigenvalueRatio)
}

/// Eigenvalues of a field matrix, with multiplicity, in its splitting field.
pub(crate) fn split_roots(x: &Mat) -> Result<Vec<WittElem>, MatError> {
    let ring = x.ring();
    let cp = char_poly(x);
    let facs = ff_factorize(&cp)?;
    let split = facs
        .iter()
        .fold(1u64, |acc, (f, _)| lcm(acc, (f.len() - 1) as u64)) as usize;
    let big_d = ring.degree() * split;
    let facs = if split == 1 {
        facs
    } else {
        ff_factorize(&embed_poly(&cp, big_d)?)?
    };
    let mut roots = Vec::new();
    for (f, mult) in facs {
        for _ in 0..mult {
            roots.push(-&f[0]);
        }
    }
    roots.sort();
    Ok(roots)
}
