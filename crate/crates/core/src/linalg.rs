//! Dense linear algebra over a residue field `F_{ell^d}`: reduced row echelon
//! form with leftmost pivots, kernels, spans and particular solutions.

use crate::coeffring::{WittElem, WittRing};

pub type Vector = Vec<WittElem>;

pub fn zero_vec(ring: &WittRing, n: usize) -> Vector {
    vec![ring.zero(); n]
}

pub fn is_zero_vec(v: &[WittElem]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn add_vec(a: &[WittElem], b: &[WittElem]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[WittElem], b: &[WittElem]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(a: &[WittElem], s: &WittElem) -> Vector {
    a.iter().map(|x| x * s).collect()
}

/// Reduced row echelon form in place; returns the pivot columns. Zero rows
/// are dropped.
pub fn rref(rows: &mut Vec<Vector>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("field element");
        rows[r] = scale_vec(&rows[r], &inv);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let sub = scale_vec(&rows[r], &f);
                rows[i] = sub_vec(&rows[i], &sub);
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Vector], ncols: usize) -> usize {
    let mut r = rows.to_vec();
    rref(&mut r, ncols).len()
}

/// Canonical basis of the span of `vecs` (its reduced echelon form).
pub fn span_basis(vecs: &[Vector], ncols: usize) -> Vec<Vector> {
    let mut r = vecs.to_vec();
    rref(&mut r, ncols);
    r
}

/// Basis of `{x : A x = 0}` for `A` with the given rows, in reduced echelon
/// form.
pub fn kernel(ring: &WittRing, a: &[Vector], ncols: usize) -> Vec<Vector> {
    let mut r = a.to_vec();
    let pivots = rref(&mut r, ncols);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = zero_vec(ring, ncols);
        v[free] = ring.one();
        for (row, &pc) in r.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        basis.push(v);
    }
    span_basis(&basis, ncols)
}

/// A solution of `A x = b` with free variables set to zero, if any.
pub fn solve(ring: &WittRing, a: &[Vector], b: &[WittElem], ncols: usize) -> Option<Vector> {
    let mut aug: Vec<Vector> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut v = row.clone();
            v.push(bi.clone());
            v
        })
        .collect();
    let pivots = rref(&mut aug, ncols + 1);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = zero_vec(ring, ncols);
    for (row, &pc) in aug.iter().zip(&pivots) {
        x[pc] = row[ncols].clone();
    }
    Some(x)
}

/// Remainder of `v` modulo a span given in reduced echelon form.
pub fn reduce_by(basis: &[Vector], v: &[WittElem]) -> Vector {
    let mut out = v.to_vec();
    for row in basis {
        let Some(pc) = row.iter().position(|x| !x.is_zero()) else {
            continue;
        };
        if !out[pc].is_zero() {
            let f = out[pc].clone();
            out = sub_vec(&out, &scale_vec(row, &f));
        }
    }
    out
}

pub fn in_span(basis: &[Vector], v: &[WittElem]) -> bool {
    is_zero_vec(&reduce_by(basis, v))
}

/// `A x` for `A` given by rows.
pub fn apply_rows(ring: &WittRing, a: &[Vector], x: &[WittElem]) -> Vector {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(ring.zero(), |acc, (p, q)| &acc + &(p * q))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(ring: &WittRing, xs: &[i64]) -> Vector {
        xs.iter().map(|&x| ring.from_int(x)).collect()
    }

    #[test]
    fn kernel_of_rank_one() {
        let f = WittRing::field(5, 1).unwrap();
        let a = vec![v(&f, &[1, 2, 3])];
        let k = kernel(&f, &a, 3);
        assert_eq!(k.len(), 2);
        for x in &k {
            assert!(is_zero_vec(&apply_rows(&f, &a, x)));
        }
        assert_eq!(k, vec![v(&f, &[1, 0, 3]), v(&f, &[0, 1, 1])]);
    }

    #[test]
    fn solve_and_inconsistency() {
        let f = WittRing::field(7, 1).unwrap();
        let a = vec![v(&f, &[1, 1]), v(&f, &[1, -1])];
        let x = solve(&f, &a, &v(&f, &[3, 1]), 2).unwrap();
        assert_eq!(x, v(&f, &[2, 1]));
        let a = vec![v(&f, &[1, 1]), v(&f, &[2, 2])];
        assert!(solve(&f, &a, &v(&f, &[1, 1]), 2).is_none());
    }

    #[test]
    fn span_membership() {
        let f = WittRing::field(5, 2).unwrap();
        let b = span_basis(&[v(&f, &[1, 1, 0]), v(&f, &[0, 1, 1])], 3);
        assert!(in_span(&b, &v(&f, &[1, 2, 1])));
        assert!(!in_span(&b, &v(&f, &[0, 0, 1])));
        assert_eq!(rank(&b, 3), 2);
    }
}
