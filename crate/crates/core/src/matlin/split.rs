//! Residual image enumeration in `GL_2(F_ell)` and extraction of a split
//! diagonal element `diag(a, 1)` from a lifted generating set.

use std::collections::HashMap;
use std::collections::VecDeque;

use super::{hensel_diagonalize, Mat, MatError};
use crate::arith::{add_mod, mul_mod};
use crate::coeffring::WittElem;

type Code = [u64; 4];

/// `|GL_2(F_ell)| = (ell^2 - 1)(ell^2 - ell)`.
pub fn gl2_order(ell: u64) -> usize {
    ((ell * ell - 1) * (ell * ell - ell)) as usize
}

fn residual_code(g: &Mat) -> Option<Code> {
    if g.dim() != 2 {
        return None;
    }
    let mut c = [0u64; 4];
    for (k, x) in g.residue().entries().iter().enumerate() {
        let co = x.coeffs();
        if co[1..].iter().any(|&v| v != 0) {
            return None;
        }
        c[k] = co[0];
    }
    Some(c)
}

fn mul_code(a: &Code, b: &Code, p: u64) -> Code {
    let e = |x: u64, y: u64, z: u64, w: u64| add_mod(mul_mod(x, y, p), mul_mod(z, w, p), p);
    [
        e(a[0], b[0], a[1], b[2]),
        e(a[0], b[1], a[1], b[3]),
        e(a[2], b[0], a[3], b[2]),
        e(a[2], b[1], a[3], b[3]),
    ]
}

/// Subgroup of `GL_2(F_ell)` generated by the residues of some matrices,
/// with a shortest positive word for every element.
pub struct Gl2Closure {
    ell: u64,
    parent: HashMap<Code, Option<(Code, usize)>>,
}

impl Gl2Closure {
    pub fn len(&self) -> usize {
        self.parent.len()
    }
    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
    pub fn is_full(&self) -> bool {
        self.len() == gl2_order(self.ell)
    }
    pub fn contains(&self, c: &Code) -> bool {
        self.parent.contains_key(c)
    }

    /// Generator indices whose product, left to right, is `c`.
    pub fn word_of(&self, c: &Code) -> Option<Vec<usize>> {
        let mut word = Vec::new();
        let mut cur = *c;
        loop {
            match self.parent.get(&cur)? {
                None => break,
                Some((prev, g)) => {
                    word.push(*g);
                    cur = *prev;
                }
            }
        }
        word.reverse();
        Some(word)
    }
}

/// Breadth-first closure of the residual images of `2 x 2` matrices whose
/// residues have entries in the prime field.
pub fn gl2_closure(gens: &[Mat]) -> Result<Gl2Closure, MatError> {
    let ring = gens.first().ok_or(MatError::DimensionMismatch(0, 2))?.ring();
    let ell = ring.ell();
    let codes: Vec<Code> = gens
        .iter()
        .map(|g| residual_code(g).ok_or(MatError::EigenvaluesNotInField))
        .collect::<Result<_, _>>()?;
    let id = [1, 0, 0, 1];
    let mut parent = HashMap::new();
    parent.insert(id, None);
    let mut queue = VecDeque::from([id]);
    while let Some(cur) = queue.pop_front() {
        for (i, g) in codes.iter().enumerate() {
            let next = mul_code(&cur, g, ell);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((cur, i)));
                queue.push_back(next);
            }
        }
    }
    Ok(Gl2Closure { ell, parent })
}

/// Result of [`find_split_diagonal`]: `conjugator^{-1} element conjugator =
/// diagonal = diag(a, 1)`, where `element` is the product of the lifted
/// generators along `word`, raised to the power `ell^{m-1}`.
#[derive(Clone, Debug)]
pub struct SplitDiagonal {
    pub word: Vec<usize>,
    pub element: Mat,
    pub conjugator: Mat,
    pub diagonal: Mat,
    pub a: WittElem,
}

/// Finds `diag(a, 1)` with `a` a Teichmuller lift in `Z/ell^m`,
/// `a != +-1 mod ell`, conjugate to an element of the group generated by
/// `gens`, whose residual image must be all of `GL_2(F_ell)`.
pub fn find_split_diagonal(gens: &[Mat]) -> Result<SplitDiagonal, MatError> {
    let closure = gl2_closure(gens)?;
    let ell = closure.ell;
    if !closure.is_full() {
        return Err(MatError::ResidualImageTooSmall {
            got: closure.len(),
            need: gl2_order(ell),
        });
    }
    let ring = gens[0].ring();
    let m = ring.precision();
    let abar = (2..ell - 1).next().expect("ell >= 5");
    let word = closure
        .word_of(&[abar, 0, 0, 1])
        .expect("full image contains every element");
    let mut g = Mat::identity(ring, 2);
    for &i in &word {
        g = g.mul(&gens[i]);
    }
    let (p, _) = hensel_diagonalize(&g)?;
    let e = (ell as u128).pow(m - 1);
    let element = g.pow(e);
    let diagonal = p.inverse()?.mul(&element).mul(&p);
    let a = diagonal.get(0, 0).clone();
    assert!(
        diagonal.get(1, 1).is_one() && diagonal.get(0, 1).is_zero() && diagonal.get(1, 0).is_zero(),
        "ell^(m-1) power of a residually diag(a, 1) element is diag(teich(a), 1)"
    );
    Ok(SplitDiagonal {
        word,
        element,
        conjugator: p,
        diagonal,
        a,
    })
}
