//! Coefficient modules `Ad^0` and its Cartier dual, 1-cocycles of finitely
//! presented groups via Fox derivatives, local restrictions, Sha kernels and
//! relator-defect lifting.

use serde::Serialize;
use thiserror::Error;

use crate::coeffring::{RingError, WittElem, WittRing};
use crate::galois_model::{Deformation, Letter, ModelError, ModelGroup, Place, Word};
use crate::linalg::{self, Vector};
use crate::matlin::{Mat, MatError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CohomError {
    #[error("lift of generator {0} does not reduce to the current image")]
    LiftsDoNotReduce(String),
    #[error("det of lift of generator {0} is not epsilon")]
    DetNotEpsilon(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Twist {
    Adjoint,
    CartierDual,
    /// Arbitrary action supplied directly.
    Plain,
}

/// A finite-dimensional module over `F_{ell^d}` with an action of each
/// generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GModule {
    ring: WittRing,
    dim: usize,
    twist: Twist,
    actions: Vec<Mat>,
    inverses: Vec<Mat>,
}

impl GModule {
    pub fn from_actions(ring: &WittRing, actions: Vec<Mat>, twist: Twist) -> Result<Self, CohomError> {
        if !ring.is_field() {
            return Err(CohomError::Invalid(format!("{ring} is not a field")));
        }
        let dim = actions.first().map_or(0, |a| a.dim());
        if actions.iter().any(|a| a.ring() != ring || a.dim() != dim) {
            return Err(CohomError::Invalid("actions of mixed shape".into()));
        }
        let inverses = actions
            .iter()
            .map(|a| a.inverse())
            .collect::<Result<_, _>>()?;
        Ok(GModule {
            ring: ring.clone(),
            dim,
            twist,
            actions,
            inverses,
        })
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn twist(&self) -> Twist {
        self.twist
    }
    pub fn ngens(&self) -> usize {
        self.actions.len()
    }
    pub fn action(&self, i: usize) -> &Mat {
        &self.actions[i]
    }

    fn letter(&self, l: Letter) -> &Mat {
        if l.inv {
            &self.inverses[l.gen]
        } else {
            &self.actions[l.gen]
        }
    }

    pub fn act_word(&self, w: &Word) -> Mat {
        w.0.iter()
            .fold(Mat::identity(&self.ring, self.dim), |acc, &l| acc.mul(self.letter(l)))
    }

    /// Contragredient twisted by the scalars `eps[i]`: `g -> eps(g) (A_g^{-1})^T`.
    pub fn dual(&self, eps: &[WittElem]) -> Result<GModule, CohomError> {
        if eps.len() != self.actions.len() {
            return Err(CohomError::Invalid("one epsilon per generator".into()));
        }
        let twist = match self.twist {
            Twist::Adjoint => Twist::CartierDual,
            Twist::CartierDual => Twist::Adjoint,
            Twist::Plain => Twist::Plain,
        };
        let actions = self
            .inverses
            .iter()
            .zip(eps)
            .map(|(ai, e)| ai.transpose().scale(e))
            .collect();
        GModule::from_actions(&self.ring, actions, twist)
    }

    /// Dimension of the invariants `M^G`.
    pub fn invariants_dim(&self) -> usize {
        let id = Mat::identity(&self.ring, self.dim);
        let rows: Vec<Vector> = self
            .actions
            .iter()
            .flat_map(|a| mat_rows(&a.sub(&id)))
            .collect();
        self.dim - linalg::rank(&rows, self.dim)
    }
}

pub(crate) fn mat_rows(a: &Mat) -> Vec<Vector> {
    let n = a.dim();
    (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).clone()).collect())
        .collect()
}

/// Coordinates of a trace-zero matrix `[[a, b], [c, -a]]` in the basis
/// `(e12, h, e21)`: `(b, a, c)`.
pub fn ad0_coords(x: &Mat) -> Vector {
    vec![x.get(0, 1).clone(), x.get(0, 0).clone(), x.get(1, 0).clone()]
}

pub fn ad0_matrix(ring: &WittRing, v: &[WittElem]) -> Mat {
    Mat::from_elems(ring, vec![v[1].clone(), v[0].clone(), v[2].clone(), -&v[1]])
        .expect("2x2")
}

fn ad0_action(g: &Mat) -> Result<Mat, CohomError> {
    let ring = g.ring();
    let gi = g.inverse()?;
    let cols: Vec<Vector> = (0..3)
        .map(|j| {
            let mut e = linalg::zero_vec(ring, 3);
            e[j] = ring.one();
            ad0_coords(&g.mul(&ad0_matrix(ring, &e)).mul(&gi))
        })
        .collect();
    Ok(Mat::from_columns(ring, &cols))
}

/// `Ad^0 rhobar` over `F_{ell^d}`, or its Cartier dual `eps (A^{-1})^T`.
pub fn build_module(
    rhobar: &Deformation,
    g: &ModelGroup,
    d: usize,
    twist: Twist,
) -> Result<GModule, CohomError> {
    if rhobar.level() != 1 {
        return Err(CohomError::Invalid("residual representation expected".into()));
    }
    let rho = if rhobar.degree() == d {
        rhobar.clone()
    } else {
        rhobar.embed(d)?
    };
    let actions = rho
        .images()
        .iter()
        .map(ad0_action)
        .collect::<Result<_, _>>()?;
    let adj = GModule::from_actions(rho.ring(), actions, Twist::Adjoint)?;
    match twist {
        Twist::Adjoint => Ok(adj),
        Twist::CartierDual => adj.dual(&epsilon_residues(g, rho.ring())?),
        Twist::Plain => Err(CohomError::Invalid("plain twist needs explicit actions".into())),
    }
}

pub(crate) fn epsilon_residues(g: &ModelGroup, ring: &WittRing) -> Result<Vec<WittElem>, CohomError> {
    (0..g.ngens())
        .map(|i| {
            let w = Word::gen(i);
            Ok(crate::coeffring::embed(
                &g.epsilon_word(&w, &WittRing::field(g.ell, 1)?)?,
                ring.degree(),
            )?)
        })
        .collect()
}

/// A 1-cocycle given by its values on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cocycle {
    pub values: Vec<Vector>,
}

impl Cocycle {
    pub fn zero(m: &GModule) -> Cocycle {
        Cocycle {
            values: vec![linalg::zero_vec(&m.ring, m.dim); m.ngens()],
        }
    }

    pub fn from_flat(m: &GModule, v: &[WittElem]) -> Cocycle {
        Cocycle {
            values: v.chunks(m.dim.max(1)).map(|c| c.to_vec()).collect(),
        }
    }

    pub fn flat(&self) -> Vector {
        self.values.concat()
    }

    /// Extension to words by `f(gh) = f(g) + g f(h)`.
    pub fn eval(&self, m: &GModule, w: &Word) -> Vector {
        let mut val = linalg::zero_vec(&m.ring, m.dim);
        let mut prefix = Mat::identity(&m.ring, m.dim);
        for &l in &w.0 {
            // f(g^{-1}) = -g^{-1} f(g)
            if l.inv {
                let t = prefix.mul(&m.inverses[l.gen]).mul_vec(&self.values[l.gen]);
                val = linalg::sub_vec(&val, &t);
            } else {
                val = linalg::add_vec(&val, &prefix.mul_vec(&self.values[l.gen]));
            }
            prefix = prefix.mul(m.letter(l));
        }
        val
    }

    /// The coboundary `g -> g x - x`.
    pub fn coboundary(m: &GModule, x: &[WittElem]) -> Cocycle {
        Cocycle {
            values: m
                .actions
                .iter()
                .map(|a| linalg::sub_vec(&a.mul_vec(x), x))
                .collect(),
        }
    }

    pub fn add(&self, other: &Cocycle) -> Cocycle {
        Cocycle {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| linalg::add_vec(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: &WittElem) -> Cocycle {
        Cocycle {
            values: self.values.iter().map(|a| linalg::scale_vec(a, s)).collect(),
        }
    }
}

/// Matrix of `f -> f(w)` on flattened cocycles: `dim` rows, one column per
/// generator coordinate.
pub fn eval_matrix(m: &GModule, w: &Word) -> Vec<Vector> {
    let k = m.dim;
    let mut block = vec![linalg::zero_vec(&m.ring, m.ngens() * k); k];
    let mut prefix = Mat::identity(&m.ring, k);
    for &l in &w.0 {
        let (coef, neg) = if l.inv {
            (prefix.mul(&m.inverses[l.gen]), true)
        } else {
            (prefix.clone(), false)
        };
        for (i, row) in block.iter_mut().enumerate() {
            for j in 0..k {
                let c = coef.get(i, j);
                let slot = &mut row[l.gen * k + j];
                *slot = if neg { &*slot - c } else { &*slot + c };
            }
        }
        prefix = prefix.mul(m.letter(l));
    }
    block
}

/// Linearised relator system: row block `r`, column block `i` is the Fox
/// derivative of relator `r` in generator `i`, acting through `M`.
pub fn fox_matrix(relators: &[Word], m: &GModule) -> Vec<Vector> {
    relators.iter().flat_map(|r| eval_matrix(m, r)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CocycleSpace {
    /// Flattened cocycles in reduced echelon form.
    pub z1: Vec<Vector>,
    pub b1: Vec<Vector>,
    /// Canonical class representatives: reduced modulo `b1`.
    pub h1_basis: Vec<Vector>,
    pub h1: usize,
}

impl CocycleSpace {
    /// Canonical representative of the class of `f`.
    pub fn class_of(&self, f: &[WittElem]) -> Vector {
        linalg::reduce_by(&self.b1, f)
    }
}

pub fn cocycle_space(g: &ModelGroup, m: &GModule) -> Result<CocycleSpace, CohomError> {
    if m.ngens() != g.ngens() {
        return Err(CohomError::Invalid("module and group disagree on generators".into()));
    }
    let ncols = m.ngens() * m.dim;
    let fox = fox_matrix(&g.relators, m);
    let z1 = linalg::kernel(&m.ring, &fox, ncols);
    let b1 = coboundary_basis(m);
    let h1_basis = complement(&b1, &z1, ncols);
    Ok(CocycleSpace {
        h1: z1.len() - b1.len(),
        z1,
        b1,
        h1_basis,
    })
}

pub(crate) fn coboundary_basis(m: &GModule) -> Vec<Vector> {
    let gens: Vec<Vector> = (0..m.dim)
        .map(|j| {
            let mut e = linalg::zero_vec(&m.ring, m.dim);
            e[j] = m.ring.one();
            Cocycle::coboundary(m, &e).flat()
        })
        .collect();
    linalg::span_basis(&gens, m.ngens() * m.dim)
}

// Span of the vectors reduced modulo `sub`: a canonical complement.
fn complement(sub: &[Vector], vecs: &[Vector], ncols: usize) -> Vec<Vector> {
    let reduced: Vec<Vector> = vecs.iter().map(|v| linalg::reduce_by(sub, v)).collect();
    linalg::span_basis(&reduced, ncols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalClass {
    ZeroClass,
    UnramifiedNonzero,
    Ramified,
}

/// `(f(sigma_v), f(tau_v))`.
pub fn restrict(f: &Cocycle, m: &GModule, v: &Place) -> (Vector, Vector) {
    (f.eval(m, &v.sigma), f.eval(m, &v.tau))
}

fn minus_id(a: &Mat) -> Vec<Vector> {
    mat_rows(&a.sub(&Mat::identity(a.ring(), a.dim())))
}

/// Class of the restriction of `f` to the subgroup generated by
/// `sigma_v, tau_v`.
pub fn restrict_and_classify(f: &Cocycle, m: &GModule, v: &Place) -> LocalClass {
    let (fs, ft) = restrict(f, m, v);
    let s = minus_id(&m.act_word(&v.sigma));
    let t = minus_id(&m.act_word(&v.tau));
    let both: Vec<Vector> = s.iter().chain(&t).cloned().collect();
    let rhs: Vector = fs.iter().chain(&ft).cloned().collect();
    if linalg::solve(&m.ring, &both, &rhs, m.dim).is_some() {
        LocalClass::ZeroClass
    } else if linalg::solve(&m.ring, &t, &ft, m.dim).is_some() {
        LocalClass::UnramifiedNonzero
    } else {
        LocalClass::Ramified
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShaKernel {
    /// Canonical class representatives, flattened.
    pub basis: Vec<Vector>,
    pub h1: usize,
}

/// Kernel of `H^1(G, M) -> prod_v H^1(G_v, M)`.
pub fn sha_kernel(g: &ModelGroup, m: &GModule, places: &[&Place]) -> Result<ShaKernel, CohomError> {
    let space = cocycle_space(g, m)?;
    Ok(sha_within(m, &space.z1, &space.b1, space.h1, places))
}

/// The same kernel on the classes unramified outside `places`, the analogue
/// of `Sha^1_S`.
pub fn sha_kernel_unramified(
    g: &ModelGroup,
    m: &GModule,
    places: &[&Place],
) -> Result<ShaKernel, CohomError> {
    let labels: Vec<&str> = places.iter().map(|v| v.label.as_str()).collect();
    let z = unramified_outside(g, m, &labels)?;
    let b = coboundary_basis(m);
    let h1 = z.len() - b.len();
    Ok(sha_within(m, &z, &b, h1, places))
}

fn sha_within(m: &GModule, z1: &[Vector], b1: &[Vector], h1: usize, places: &[&Place]) -> ShaKernel {
    let k = m.dim;
    let nz = z1.len();
    let ncols = nz + places.len() * k;
    // unknowns: coefficients a on z1, then x_v per place;
    // sum_i a_i res_v(z_i) - ((sigma_v - 1) x_v, (tau_v - 1) x_v) = 0
    let mut rows: Vec<Vector> = Vec::new();
    let cocycles: Vec<Cocycle> = z1.iter().map(|z| Cocycle::from_flat(m, z)).collect();
    for (pi, v) in places.iter().enumerate() {
        let res: Vec<(Vector, Vector)> = cocycles.iter().map(|c| restrict(c, m, v)).collect();
        for (word, which) in [(&v.sigma, 0usize), (&v.tau, 1usize)] {
            let a = m.act_word(word).sub(&Mat::identity(&m.ring, k));
            for r in 0..k {
                let mut row = linalg::zero_vec(&m.ring, ncols);
                for (i, rv) in res.iter().enumerate() {
                    row[i] = if which == 0 { rv.0[r].clone() } else { rv.1[r].clone() };
                }
                for j in 0..k {
                    row[nz + pi * k + j] = -a.get(r, j);
                }
                rows.push(row);
            }
        }
    }
    let ker = linalg::kernel(&m.ring, &rows, ncols);
    let ncz = m.ngens() * k;
    let kernel_cocycles: Vec<Vector> = ker
        .iter()
        .map(|sol| {
            let mut acc = linalg::zero_vec(&m.ring, ncz);
            for (a, z) in sol[..nz].iter().zip(z1) {
                acc = linalg::add_vec(&acc, &linalg::scale_vec(z, a));
            }
            acc
        })
        .collect();
    ShaKernel {
        basis: complement(b1, &kernel_cocycles, ncz),
        h1,
    }
}

/// Scales each lift by `sqrt(epsilon / det)`, computed as `1 + (u - 1)/2`;
/// valid when `u = 1 mod ell^{m}`, `m >= 1`.
pub fn normalize_det(g: &ModelGroup, lifts: &[Mat]) -> Result<Vec<Mat>, CohomError> {
    let ring = lifts
        .first()
        .map(|l| l.ring().clone())
        .ok_or_else(|| CohomError::Invalid("no lifts".into()))?;
    let eps = epsilon_at(g, &ring)?;
    let half = ring.from_int(2).inv()?;
    lifts
        .iter()
        .zip(&eps)
        .enumerate()
        .map(|(i, (l, e))| {
            let u = e.mul(&l.det().inv()?);
            let um1 = u.sub(&ring.one());
            if um1.valuation() < 1 {
                return Err(CohomError::DetNotEpsilon(g.generators[i].clone()));
            }
            let s = ring.one().add(&um1.mul(&half));
            Ok(l.scale(&s))
        })
        .collect()
}

fn epsilon_at(g: &ModelGroup, ring: &WittRing) -> Result<Vec<WittElem>, CohomError> {
    let base = WittRing::new(g.ell, 1, ring.precision())?;
    (0..g.ngens())
        .map(|i| Ok(crate::coeffring::embed(&g.epsilon_word(&Word::gen(i), &base)?, ring.degree())?))
        .collect()
}

/// Each relator evaluated under the lifts is `I + ell^m z_r`; returns the
/// `z_r` in `Ad^0` coordinates over the residue field.
pub fn relator_defects(
    g: &ModelGroup,
    rho_m: &Deformation,
    lifts: &[Mat],
) -> Result<Vec<Vector>, CohomError> {
    let m = rho_m.level();
    if lifts.len() != g.ngens() {
        return Err(CohomError::Invalid("one lift per generator".into()));
    }
    let ring = rho_m.ring().with_precision(m + 1)?;
    let eps = epsilon_at(g, &ring)?;
    for (i, l) in lifts.iter().enumerate() {
        if l.ring() != &ring || &l.reduce_to(m)? != rho_m.image(i) {
            return Err(CohomError::LiftsDoNotReduce(g.generators[i].clone()));
        }
        if l.det() != eps[i] {
            return Err(CohomError::DetNotEpsilon(g.generators[i].clone()));
        }
    }
    let lifted = Deformation::new(&ring, lifts.to_vec())?;
    g.relators
        .iter()
        .map(|r| {
            let x = lifted.evaluate(r)?.sub(&Mat::identity(&ring, 2));
            let z = x.map(|e| e.div_ell_pow(m)).map_err(|_| {
                CohomError::Invalid(format!(
                    "relator {} fails below level {}",
                    g.format_word(r),
                    m + 1
                ))
            })?;
            if !z.trace().is_zero() {
                return Err(CohomError::Invalid("defect is not trace-zero".into()));
            }
            Ok(ad0_coords(&z))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LiftOutcome {
    /// Per-generator adjustments `c(g)` in `Ad^0`.
    Adjust(Cocycle),
    /// Defects reduced modulo the boundaries of all adjustments; nonzero.
    Obstructed(Vector),
}

/// Solves `Fox(c) = -z` for a generator adjustment `c`.
pub fn lift_solve(g: &ModelGroup, ad0: &GModule, defects: &[Vector]) -> Result<LiftOutcome, CohomError> {
    if defects.len() != g.relators.len() {
        return Err(CohomError::Invalid("one defect per relator".into()));
    }
    let k = ad0.dim;
    let ncols = ad0.ngens() * k;
    let fox = fox_matrix(&g.relators, ad0);
    let rhs: Vector = defects.iter().flatten().map(|x| -x).collect();
    if let Some(c) = linalg::solve(&ad0.ring, &fox, &rhs, ncols) {
        return Ok(LiftOutcome::Adjust(Cocycle::from_flat(ad0, &c)));
    }
    let image = linalg::span_basis(&columns(&fox, ncols), fox.len());
    Ok(LiftOutcome::Obstructed(linalg::reduce_by(
        &image,
        &defects.concat(),
    )))
}

pub(crate) fn columns(rows: &[Vector], ncols: usize) -> Vec<Vector> {
    (0..ncols)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// `g -> (I + ell^m c(g)) L_g` with `c` lifted coefficient-wise.
pub fn apply_adjustment(lifts: &[Mat], c: &Cocycle, m: u32) -> Result<Vec<Mat>, CohomError> {
    lifts
        .iter()
        .zip(&c.values)
        .map(|(l, v)| {
            let ring = l.ring();
            let lifted: Vector = v
                .iter()
                .map(|x| x.lift_to(ring.precision()).map(|y| y.times_ell_pow(m)))
                .collect::<Result<_, _>>()?;
            let corr = Mat::identity(ring, 2).add(&ad0_matrix(ring, &lifted));
            Ok(corr.mul(l))
        })
        .collect()
}

/// Cocycles unramified outside `allowed`: `f(tau_v) in (tau_v - 1)M` at
/// every other place of `g`. Reduced echelon basis, flattened.
pub fn unramified_outside(
    g: &ModelGroup,
    m: &GModule,
    allowed: &[&str],
) -> Result<Vec<Vector>, CohomError> {
    let k = m.dim;
    let nf = m.ngens() * k;
    let others: Vec<&Place> = g
        .places_by_label()
        .into_iter()
        .filter(|v| !allowed.contains(&v.label.as_str()))
        .collect();
    let ncols = nf + others.len() * k;
    let widen = |row: &Vector| {
        let mut r = row.clone();
        r.resize(ncols, m.ring.zero());
        r
    };
    let mut rows: Vec<Vector> = fox_matrix(&g.relators, m).iter().map(widen).collect();
    for (i, v) in others.iter().enumerate() {
        let t = m.act_word(&v.tau).sub(&Mat::identity(&m.ring, k));
        for (r, ev) in eval_matrix(m, &v.tau).iter().enumerate() {
            let mut row = widen(ev);
            for j in 0..k {
                row[nf + i * k + j] = -t.get(r, j);
            }
            rows.push(row);
        }
    }
    let ker = linalg::kernel(&m.ring, &rows, ncols);
    let proj: Vec<Vector> = ker.iter().map(|v| v[..nf].to_vec()).collect();
    Ok(linalg::span_basis(&proj, nf))
}

/// Cohomology of the subgroup generated by `sigma_v, tau_v`, presented as
/// `<sigma, tau | sigma tau sigma^-1 tau^-q>`, or as the infinite cyclic group
/// on `sigma` when `tau_v` is the empty word. Vectors are `f(sigma)` followed
/// by `f(tau)` in the first case and `f(sigma)` alone in the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCohomology {
    pub width: usize,
    pub z1: Vec<Vector>,
    pub b1: Vec<Vector>,
    /// Span of `b1` and the classes inflated from `<sigma>` acting on `M^tau`.
    pub nr: Vec<Vector>,
}

impl LocalCohomology {
    pub fn h1(&self) -> usize {
        self.z1.len() - self.b1.len()
    }
    pub fn h1_nr(&self) -> usize {
        self.nr.len() - self.b1.len()
    }
}

pub fn local_cohomology(m: &GModule, v: &Place) -> Result<LocalCohomology, CohomError> {
    let k = m.dim;
    let sigma = m.act_word(&v.sigma);
    let tau = m.act_word(&v.tau);
    if v.tau.reduced().is_empty() {
        let all: Vec<Vector> = (0..k).map(|i| unit(&m.ring, k, i)).collect();
        let b1 = linalg::span_basis(&columns(&minus_id(&sigma), k), k);
        return Ok(LocalCohomology {
            width: k,
            z1: all.clone(),
            b1,
            nr: all,
        });
    }
    let names = vec!["sigma".to_string(), "tau".to_string()];
    let rel = Word::parse(&format!("sigma*tau*sigma^-1*tau^-{}", v.q), &names)?;
    let local = GModule::from_actions(&m.ring, vec![sigma, tau.clone()], Twist::Plain)?;
    let z1 = linalg::kernel(&m.ring, &fox_matrix(std::slice::from_ref(&rel), &local), 2 * k);
    let b1 = coboundary_basis(&local);
    // (x, 0) with x fixed by tau and satisfying the relator system
    let mut rows = fox_matrix(&[rel], &local);
    rows.extend(minus_id(&tau).into_iter().map(|mut r| {
        r.resize(2 * k, m.ring.zero());
        r
    }));
    for i in 0..k {
        rows.push(unit(&m.ring, 2 * k, k + i));
    }
    let mut nr = linalg::kernel(&m.ring, &rows, 2 * k);
    nr.extend(b1.iter().cloned());
    Ok(LocalCohomology {
        width: 2 * k,
        z1,
        nr: linalg::span_basis(&nr, 2 * k),
        b1,
    })
}

/// Restriction of a flattened cocycle in the coordinates of
/// [`local_cohomology`].
pub fn restriction_vector(f: &Cocycle, m: &GModule, v: &Place) -> Vector {
    let (fs, ft) = restrict(f, m, v);
    if v.tau.reduced().is_empty() {
        fs
    } else {
        [fs, ft].concat()
    }
}

pub(crate) fn unit(ring: &WittRing, n: usize, i: usize) -> Vector {
    let mut v = linalg::zero_vec(ring, n);
    v[i] = ring.one();
    v
}
