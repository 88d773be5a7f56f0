//! Lattices over `V = W(F_{ell^d})` inside `K^n`, `K = V[1/ell]`, at a finite
//! working precision: module bases by valuation pivoting and integral models
//! of bounded matrix groups by lattice saturation.

use super::{Mat, MatError};
use crate::coeffring::{WittElem, WittRing};

/// Working precision used when callers do not choose one.
pub const DEFAULT_WORKING_PRECISION: u32 = 20;

const SATURATION_BOUND: usize = 64;

/// `num * ell^{-den}` with `num` read at the working precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KElem {
    pub num: WittElem,
    pub den: u32,
}

impl KElem {
    pub fn new(num: WittElem, den: u32) -> Self {
        KElem { num, den }.canonical()
    }

    pub fn integral(num: WittElem) -> Self {
        KElem { num, den: 0 }
    }

    /// Numerator a unit or denominator zero.
    pub fn canonical(mut self) -> Self {
        let m = self.num.ring().precision();
        if self.num.is_zero() {
            self.den = 0;
            return self;
        }
        while self.den > 0 && !self.num.is_unit() {
            self.num = self
                .num
                .div_ell_pow(1)
                .and_then(|x| x.lift_to(m))
                .expect("nonunit nonzero numerator is divisible by ell");
            self.den -= 1;
        }
        self
    }

    /// Valuation; `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.num.is_zero() {
            None
        } else {
            Some(self.num.valuation() as i64 - self.den as i64)
        }
    }

    /// Numerator scaled to denominator `e >= den`.
    fn at_den(&self, e: u32) -> WittElem {
        self.num.times_ell_pow(e - self.den)
    }
}

/// A vector of `K^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValVec(pub Vec<KElem>);

impl ValVec {
    pub fn from_ints(ring: &WittRing, nums: &[i64], den: u32) -> Self {
        ValVec(
            nums.iter()
                .map(|&v| KElem::new(ring.from_int(v), den))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn max_den(&self) -> u32 {
        self.0.iter().map(|x| x.den).max().unwrap_or(0)
    }

    /// Common-denominator form.
    fn scaled(&self, e: u32) -> Vec<WittElem> {
        self.0.iter().map(|x| x.at_den(e)).collect()
    }
}

/// `num * ell^{-den}` for a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KMat {
    pub num: Mat,
    pub den: u32,
}

impl KMat {
    pub fn new(num: Mat, den: u32) -> Self {
        KMat { num, den }.canonical()
    }

    pub fn integral(num: Mat) -> Self {
        KMat { num, den: 0 }
    }

    pub fn from_ints(ring: &WittRing, nums: &[i64], den: u32) -> Result<Self, MatError> {
        Ok(Self::new(Mat::from_ints(ring, nums)?, den))
    }

    pub fn canonical(mut self) -> Self {
        let m = self.num.ring().precision();
        while self.den > 0 && self.num.valuation() >= 1 && !self.num.is_zero() {
            self.num = self
                .num
                .map(|x| x.div_ell_pow(1).and_then(|y| y.lift_to(m)))
                .expect("divisible");
            self.den -= 1;
        }
        if self.num.is_zero() {
            self.den = 0;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.num.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> KElem {
        KElem::new(self.num.get(i, j).clone(), self.den)
    }

    pub fn mul(&self, other: &KMat) -> KMat {
        KMat::new(self.num.mul(&other.num), self.den + other.den)
    }

    pub fn is_integral(&self) -> bool {
        self.den == 0
    }

    pub fn identity(ring: &WittRing, n: usize) -> KMat {
        KMat::integral(Mat::identity(ring, n))
    }

    /// Inverse in `GL_n(K)`; the determinant must be nonzero at the working
    /// precision.
    pub fn inverse(&self) -> Result<KMat, MatError> {
        let det = self.num.det();
        if det.is_zero() {
            return Err(MatError::Singular);
        }
        let s = det.valuation();
        let m = det.ring().precision();
        let unit = det.div_ell_pow(s).and_then(|u| u.lift_to(m));
        let unit = if s == 0 { det.clone() } else { unit? };
        let adj = self.num.adjugate().scale(&unit.inv()?);
        // (num / ell^den)^{-1} = ell^den adj / (u ell^s)
        if s >= self.den {
            Ok(KMat::new(adj, s - self.den))
        } else {
            Ok(KMat::new(adj.times_ell_pow(self.den - s), 0))
        }
    }

    pub fn apply(&self, v: &ValVec) -> ValVec {
        let e = v.max_den();
        let out = self.num.mul_vec(&v.scaled(e));
        ValVec(
            out.into_iter()
                .map(|x| KElem::new(x, e + self.den))
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ValVec]) -> KMat {
        let e = cols.iter().map(|c| c.max_den()).max().unwrap_or(0);
        let scaled: Vec<Vec<WittElem>> = cols.iter().map(|c| c.scaled(e)).collect();
        let ring = scaled[0][0].ring().clone();
        KMat::new(Mat::from_columns(&ring, &scaled), e)
    }

    /// `P^{-1} self P`.
    pub fn conjugate_by(&self, p: &KMat) -> Result<KMat, MatError> {
        Ok(p.inverse()?.mul(self).mul(p))
    }
}

/// A `V`-basis of the module generated by `gens`, which must span `K^n`.
///
/// Coordinates are processed in order; for coordinate `i` the remaining
/// generator of least valuation there (earliest on ties) becomes the pivot
/// and is used to clear coordinate `i` from all other generators, which is
/// the elimination `m_r = -(a_1/a_r) m_1 - ...` of the freeness argument.
/// Pivots are scaled to be exact powers of `ell`, so the basis matrix is
/// lower triangular with diagonal `ell^{v_i - E}`.
pub fn module_basis(gens: &[ValVec]) -> Result<Vec<ValVec>, MatError> {
    let n = gens.first().ok_or(MatError::DoesNotSpan)?.len();
    if gens.iter().any(|g| g.len() != n) {
        return Err(MatError::DimensionMismatch(n, 0));
    }
    let ring = gens[0].0[0].num.ring().clone();
    let mprec = ring.precision();
    let e = gens.iter().map(|g| g.max_den()).max().unwrap_or(0);
    let mut rest: Vec<Vec<WittElem>> = gens.iter().map(|g| g.scaled(e)).collect();
    let mut basis = Vec::with_capacity(n);
    let mut lost = 0u32;
    for i in 0..n {
        let (idx, v) = rest
            .iter()
            .enumerate()
            .map(|(k, g)| (k, g[i].valuation()))
            .min_by_key(|&(k, v)| (v, k))
            .ok_or(MatError::DoesNotSpan)?;
        // Entries of valuation >= mprec - lost are not determined any more.
        if lost + v >= mprec {
            return Err(if lost == 0 {
                MatError::DoesNotSpan
            } else {
                MatError::PrecisionExhausted
            });
        }
        let mut piv = rest.remove(idx);
        let unit = piv[i].div_ell_pow(v).and_then(|u| u.lift_to(mprec));
        let unit = if v == 0 { piv[i].clone() } else { unit? };
        let uinv = unit.inv()?;
        for x in piv.iter_mut() {
            *x = &*x * &uinv;
        }
        for g in rest.iter_mut() {
            if g[i].is_zero() {
                continue;
            }
            let c = if v == 0 {
                g[i].clone()
            } else {
                g[i].div_ell_pow(v)?.lift_to(mprec)?
            };
            for (x, p) in g.iter_mut().zip(&piv) {
                *x = &*x - &(&c * p);
            }
            g[i] = ring.zero();
        }
        lost += v;
        basis.push(piv);
    }
    Ok(basis
        .into_iter()
        .map(|b| ValVec(b.into_iter().map(|x| KElem::new(x, e)).collect()))
        .collect())
}

/// Valuation of the determinant of a lower-triangular basis.
fn covolume(basis: &[ValVec]) -> i64 {
    basis
        .iter()
        .enumerate()
        .map(|(i, b)| b.0[i].valuation().expect("pivot is nonzero"))
        .sum()
}

/// A conjugator `P` with `P^{-1} g P` integral for every generator, built as
/// the basis of the saturated lattice `M = V^n + sum_j g_j^{+-1} M`.
pub fn integral_model(gens: &[KMat]) -> Result<KMat, MatError> {
    let first = gens.first().ok_or(MatError::DimensionMismatch(0, 1))?;
    let n = first.dim();
    let ring = first.num.ring().clone();
    let mut acting = Vec::with_capacity(2 * gens.len());
    for g in gens {
        acting.push(g.clone());
        acting.push(g.inverse()?);
    }
    let std: Vec<ValVec> = (0..n)
        .map(|i| {
            ValVec(
                (0..n)
                    .map(|j| KElem::integral(ring.from_int((i == j) as i64)))
                    .collect(),
            )
        })
        .collect();
    let mut basis = std.clone();
    let mut vol = 0i64;
    for _ in 0..SATURATION_BOUND {
        let mut span = std.clone();
        for a in &acting {
            span.extend(basis.iter().map(|b| a.apply(b)));
        }
        basis = match module_basis(&span) {
            Ok(b) => b,
            Err(MatError::PrecisionExhausted) => return Err(MatError::UnboundedGroup),
            Err(e) => return Err(e),
        };
        let next = covolume(&basis);
        if next == vol {
            return Ok(KMat::from_columns(&basis));
        }
        vol = next;
    }
    Err(MatError::UnboundedGroup)
}

/// `alpha = v(ell) = 1`: in the unramified ring the only residue-characteristic
/// prime has valuation one, so no root of unity other than 1 lies in the ball
/// `v(x - 1) > alpha`.
pub fn root_of_unity_bound(_ring: &WittRing) -> u32 {
    1
}
