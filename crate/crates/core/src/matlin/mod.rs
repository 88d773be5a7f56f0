//! Square matrices over the coefficient rings, together with the eigenvalue,
//! Jordan, split-diagonal and integral-lattice tools built on them.

mod eigen;
mod lattice;
mod split;

use std::fmt;

use thiserror::Error;

use crate::coeffring::{embed, RingError, WittElem, WittRing};

pub use eigen::{
    char_poly, char_poly_eigs, check_tame_relation, hensel_diagonalize, jordan_decompose,
    Eigenvalue, TameBranch,
};
pub use lattice::{
    integral_model, module_basis, root_of_unity_bound, KElem, KMat, ValVec, DEFAULT_WORKING_PRECISION,
};
pub use split::{find_split_diagonal, gl2_closure, gl2_order, Gl2Closure, SplitDiagonal};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatError {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("operation needs a residue field, got {0}")]
    NotAField(String),
    #[error("residual eigenvalues coincide")]
    RepeatedResidualEigenvalues,
    #[error("eigenvalues do not lie in the residue field")]
    EigenvaluesNotInField,
    #[error("no eigenvalue pair of x has ratio q")]
    NoEigenvalueRatio,
    #[error("residual image has {got} elements, need {need}")]
    ResidualImageTooSmall { got: usize, need: usize },
    #[error("generators do not span")]
    DoesNotSpan,
    #[error("working precision exhausted")]
    PrecisionExhausted,
    #[error("lattice saturation does not stabilise")]
    UnboundedGroup,
    #[error("cannot parse matrix: {0}")]
    Parse(String),
}

/// `n x n` matrix over a [`WittRing`], row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat {
    ring: WittRing,
    n: usize,
    e: Vec<WittElem>,
}

impl Mat {
    pub fn zero(ring: &WittRing, n: usize) -> Self {
        Mat {
            ring: ring.clone(),
            n,
            e: vec![ring.zero(); n * n],
        }
    }

    pub fn identity(ring: &WittRing, n: usize) -> Self {
        let mut m = Self::zero(ring, n);
        for i in 0..n {
            m.e[i * n + i] = ring.one();
        }
        m
    }

    /// Row-major entries; the length must be a perfect square.
    pub fn from_elems(ring: &WittRing, entries: Vec<WittElem>) -> Result<Self, MatError> {
        let n = (entries.len() as f64).sqrt().round() as usize;
        if n * n != entries.len() || n == 0 {
            return Err(MatError::DimensionMismatch(entries.len(), n * n));
        }
        for x in &entries {
            if x.ring() != ring {
                return Err(RingError::ParamMismatch(ring.to_string(), x.ring().to_string()).into());
            }
        }
        Ok(Mat {
            ring: ring.clone(),
            n,
            e: entries,
        })
    }

    pub fn from_ints(ring: &WittRing, entries: &[i64]) -> Result<Self, MatError> {
        Self::from_elems(ring, entries.iter().map(|&v| ring.from_int(v)).collect())
    }

    pub fn diag(ring: &WittRing, d: &[WittElem]) -> Self {
        let n = d.len();
        let mut m = Self::zero(ring, n);
        for (i, x) in d.iter().enumerate() {
            m.e[i * n + i] = x.clone();
        }
        m
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }
    pub fn dim(&self) -> usize {
        self.n
    }
    pub fn get(&self, i: usize, j: usize) -> &WittElem {
        &self.e[i * self.n + j]
    }
    pub fn set(&mut self, i: usize, j: usize, v: WittElem) {
        self.e[i * self.n + j] = v;
    }
    pub fn entries(&self) -> &[WittElem] {
        &self.e
    }
    pub fn column(&self, j: usize) -> Vec<WittElem> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }
    pub fn from_columns(ring: &WittRing, cols: &[Vec<WittElem>]) -> Self {
        let n = cols.len();
        let mut m = Self::zero(ring, n);
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    fn check(&self, other: &Mat) {
        assert_eq!(self.n, other.n, "{}", MatError::DimensionMismatch(self.n, other.n));
        assert!(
            self.ring == other.ring,
            "{}",
            RingError::ParamMismatch(self.ring.to_string(), other.ring.to_string())
        );
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.check(other);
        let e = self.e.iter().zip(&other.e).map(|(a, b)| a + b).collect();
        Mat { e, ..self.clone() }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.check(other);
        let e = self.e.iter().zip(&other.e).map(|(a, b)| a - b).collect();
        Mat { e, ..self.clone() }
    }

    pub fn neg(&self) -> Mat {
        let e = self.e.iter().map(|a| -a).collect();
        Mat { e, ..self.clone() }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        self.check(other);
        let n = self.n;
        let mut out = Mat::zero(&self.ring, n);
        for i in 0..n {
            for k in 0..n {
                let a = &self.e[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.e[i * n + j] = &out.e[i * n + j] + &(a * &other.e[k * n + j]);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: &WittElem) -> Mat {
        let e = self.e.iter().map(|a| a * s).collect();
        Mat { e, ..self.clone() }
    }

    pub fn mul_vec(&self, v: &[WittElem]) -> Vec<WittElem> {
        (0..self.n)
            .map(|i| {
                let mut acc = self.ring.zero();
                for (j, x) in v.iter().enumerate() {
                    acc = &acc + &(self.get(i, j) * x);
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut out = Mat::zero(&self.ring, n);
        for i in 0..n {
            for j in 0..n {
                out.e[j * n + i] = self.e[i * n + j].clone();
            }
        }
        out
    }

    pub fn trace(&self) -> WittElem {
        let mut acc = self.ring.zero();
        for i in 0..self.n {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(&self.ring, self.n)
    }

    pub fn is_zero(&self) -> bool {
        self.e.iter().all(|x| x.is_zero())
    }

    /// `(A - I)^n = 0`.
    pub fn is_unipotent(&self) -> bool {
        let id = Mat::identity(&self.ring, self.n);
        let t = self.sub(&id);
        let mut p = t.clone();
        for _ in 1..self.n {
            p = p.mul(&t);
        }
        p.is_zero()
    }

    /// Determinant, division-free.
    pub fn det(&self) -> WittElem {
        let cp = char_poly(self);
        if self.n.is_multiple_of(2) {
            cp[0].clone()
        } else {
            -&cp[0]
        }
    }

    /// Adjugate via Cayley-Hamilton, valid over any commutative ring.
    pub fn adjugate(&self) -> Mat {
        let n = self.n;
        let cp = char_poly(self);
        // Q = A^{n-1} + c_{n-1} A^{n-2} + ... + c_1 I and A Q = -c_0 I.
        let mut q = Mat::identity(&self.ring, n);
        for k in (1..n).rev() {
            q = self
                .mul(&q)
                .add(&Mat::identity(&self.ring, n).scale(&cp[k]));
        }
        if n.is_multiple_of(2) {
            q.neg()
        } else {
            q
        }
    }

    pub fn is_invertible(&self) -> bool {
        self.det().is_unit()
    }

    pub fn inverse(&self) -> Result<Mat, MatError> {
        let det = self.det();
        if !det.is_unit() {
            return Err(MatError::Singular);
        }
        Ok(self.adjugate().scale(&det.inv()?))
    }

    pub fn pow(&self, mut e: u128) -> Mat {
        let mut acc = Mat::identity(&self.ring, self.n);
        let mut b = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&b);
            }
            b = b.mul(&b);
            e >>= 1;
        }
        acc
    }

    /// Signed power; negative exponents need an invertible matrix.
    pub fn pow_signed(&self, e: i64) -> Result<Mat, MatError> {
        if e >= 0 {
            Ok(self.pow(e as u128))
        } else {
            Ok(self.inverse()?.pow(e.unsigned_abs() as u128))
        }
    }

    pub fn map(&self, f: impl Fn(&WittElem) -> Result<WittElem, RingError>) -> Result<Mat, MatError> {
        let e: Vec<WittElem> = self.e.iter().map(f).collect::<Result<_, _>>()?;
        let ring = e[0].ring().clone();
        Ok(Mat { ring, n: self.n, e })
    }

    pub fn reduce_to(&self, m: u32) -> Result<Mat, MatError> {
        self.map(|x| x.reduce_to(m))
    }
    pub fn lift_to(&self, m: u32) -> Result<Mat, MatError> {
        self.map(|x| x.lift_to(m))
    }
    pub fn residue(&self) -> Mat {
        self.reduce_to(1).expect("precision one is always available")
    }
    pub fn embed(&self, d2: usize) -> Result<Mat, MatError> {
        self.map(|x| embed(x, d2))
    }
    pub fn frobenius(&self) -> Mat {
        self.map(|x| Ok(x.frobenius())).expect("frobenius is total")
    }
    pub fn times_ell_pow(&self, k: u32) -> Mat {
        self.map(|x| Ok(x.times_ell_pow(k))).expect("total")
    }

    /// Minimal valuation of the entries.
    pub fn valuation(&self) -> u32 {
        self.e.iter().map(|x| x.valuation()).min().unwrap_or(0)
    }

    /// Text form `ell^m:d:[[row0],[row1],..]`, each entry its coefficient list.
    pub fn serialize(&self) -> String {
        self.to_string()
    }

    pub fn parse(s: &str) -> Result<Mat, MatError> {
        let err = || MatError::Parse(s.to_string());
        let s = s.trim();
        let (head, rest) = s.split_once('^').ok_or_else(err)?;
        let mut parts = rest.splitn(3, ':');
        let m: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let d: usize = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let body = parts.next().ok_or_else(err)?;
        let ell: u64 = head.parse().map_err(|_| err())?;
        let ring = WittRing::new(ell, d, m)?;
        let rows: Vec<Vec<Vec<i64>>> = serde_json::from_str(body).map_err(|_| err())?;
        let mut entries = Vec::new();
        for row in &rows {
            if row.len() != rows.len() {
                return Err(err());
            }
            for c in row {
                if c.iter().any(|&v| v < 0 || v as u64 >= ring.modulus_int()) {
                    return Err(err());
                }
                entries.push(ring.from_coeffs(c).map_err(|_| err())?);
            }
        }
        Mat::from_elems(&ring, entries)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:[", self.ring)?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ",")?;
                }
                let c: Vec<String> = self.get(i, j).coeffs().iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", c.join(","))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl serde::Serialize for Mat {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Mat {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Mat::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests;
