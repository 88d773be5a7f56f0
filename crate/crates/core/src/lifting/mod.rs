//! Deformation engine: cocycle twists, trace targeting, nice places, the
//! place oracle, auxiliary sets, obstruction removal and the tower driver.

mod auxiliary;
mod tower;

use thiserror::Error;

use crate::coeffring::{in_subring, RingError, WittElem};
use crate::cohomology::{
    self, apply_adjustment, eval_matrix, restrict_and_classify, restriction_vector, unramified_outside,
    CohomError, Cocycle, GModule, LocalClass,
};
use crate::galois_model::{validate_deformation, Deformation, ModelError, ModelGroup, Place};
use crate::linalg::{self, Vector};
use crate::matlin::{char_poly_eigs, Mat, MatError};

pub use auxiliary::{
    localization_ranks, obstruction, resolve_obstructions, select_auxiliary, Auxiliary, MapRank,
    Resolution,
};
pub use tower::{
    build_tower, certificate, degree_at, field_of_definition, replay_log, tower_step, verify_tower,
    Certificate, LevelLog,
    Tower, TowerFile, TowerPlan, TraceTarget, VerifyReport, Witness, PLAN_SCHEMA_VERSION,
    TOWER_SCHEMA_VERSION,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("twist fails relator {0}")]
    NotACocycle(String),
    #[error("target at {0} is not congruent to the current trace mod ell^(m-1)")]
    Inconsistent(String),
    #[error("trace target at {0} is out of reach")]
    Unreachable(String),
    #[error("no place in the pool satisfies the constraints")]
    NotFound,
    #[error("constraint classes are dependent in H^1")]
    DependentClasses,
    #[error("pool exhausted")]
    PoolExhausted,
    #[error("Sha^1 of {module} has dimension {dim}")]
    ShaNotTrivial { module: &'static str, dim: usize },
    #[error("no pool place realises the support conditions")]
    SupportConditionUnavailable,
    #[error("lifting from level {0} is obstructed")]
    Obstructed(u32),
    #[error("invalid plan: {0}")]
    PlanInvalid(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(transparent)]
    Cohom(#[from] CohomError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// `g -> (I + ell^{m-1} f(g)) rho(g)`, checked against the relators.
pub fn twist(g: &ModelGroup, rho: &Deformation, f: &Cocycle) -> Result<Deformation, LiftError> {
    let m = rho.level();
    if m < 2 {
        return Err(LiftError::Precondition("twisting needs level >= 2".into()));
    }
    let images = apply_adjustment(rho.images(), f, m - 1)?;
    let out = Deformation::new(rho.ring(), images)?;
    for r in &g.relators {
        if !out.evaluate(r)?.is_identity() {
            return Err(LiftError::NotACocycle(g.format_word(r)));
        }
    }
    Ok(out)
}

/// Row vector of `f -> tr(f(sigma_v) rhobar(sigma_v))` on flattened cocycles.
pub fn trace_functional(ad0: &GModule, rho: &Deformation, v: &Place) -> Result<Vector, LiftError> {
    let b = rho.evaluate(&v.sigma)?.residue();
    let w = [
        b.get(1, 0).clone(),
        b.get(0, 0) - b.get(1, 1),
        b.get(0, 1).clone(),
    ];
    let ev = eval_matrix(ad0, &v.sigma);
    let n = ad0.ngens() * ad0.dim();
    Ok((0..n)
        .map(|j| {
            (0..3).fold(ad0.ring().zero(), |acc, i| &acc + &(&w[i] * &ev[i][j]))
        })
        .collect())
}

/// `(target - tr rho(sigma_v)) / ell^{m-1}` as a residue, or `Inconsistent`.
fn trace_delta(rho: &Deformation, v: &Place, target: &WittElem) -> Result<WittElem, LiftError> {
    let m = rho.level();
    let diff = target - &rho.evaluate(&v.sigma)?.trace();
    if diff.is_zero() {
        return Ok(rho.ring().residue_field().zero());
    }
    if diff.valuation() < m - 1 {
        return Err(LiftError::Inconsistent(v.label.clone()));
    }
    Ok(diff.div_ell_pow(m - 1)?.residue())
}

/// Linear conditions on coefficients over a basis of cocycles.
struct System<'a> {
    ad0: &'a GModule,
    basis: Vec<Vector>,
    aux: usize,
    rows: Vec<Vector>,
    rhs: Vec<WittElem>,
}

impl<'a> System<'a> {
    fn new(ad0: &'a GModule, basis: Vec<Vector>) -> Self {
        System {
            ad0,
            basis,
            aux: 0,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    fn width(&self) -> usize {
        self.basis.len() + self.aux
    }

    fn functional(&self, phi: &[WittElem]) -> Vector {
        self.basis
            .iter()
            .map(|z| z.iter().zip(phi).fold(self.ad0.ring().zero(), |acc, (a, b)| &acc + &(a * b)))
            .collect()
    }

    fn push(&mut self, mut coeffs: Vector, rhs: WittElem) {
        coeffs.resize(self.width(), self.ad0.ring().zero());
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    /// Restriction to `v` is a local coboundary `((sigma-1)x, (tau-1)x)`.
    fn lock(&mut self, v: &Place) {
        let k = self.ad0.dim();
        let restr: Vec<Vector> = self
            .basis
            .iter()
            .map(|z| restriction_vector(&Cocycle::from_flat(self.ad0, z), self.ad0, v))
            .collect();
        let width = restr.first().map_or(k, |r| r.len());
        let id = Mat::identity(self.ad0.ring(), k);
        let s = self.ad0.act_word(&v.sigma).sub(&id);
        let t = self.ad0.act_word(&v.tau).sub(&id);
        let base = self.width();
        self.aux += k;
        for r in &mut self.rows {
            r.resize(base + k, self.ad0.ring().zero());
        }
        for i in 0..width {
            let mut row: Vector = restr.iter().map(|rv| rv[i].clone()).collect();
            row.resize(base + k, self.ad0.ring().zero());
            let a = if i < k { &s } else { &t };
            for j in 0..k {
                row[base + j] = -a.get(i % k, j);
            }
            self.rows.push(row);
            self.rhs.push(self.ad0.ring().zero());
        }
    }

    fn solve_prefix(&self, n: usize) -> Option<Vector> {
        linalg::solve(self.ad0.ring(), &self.rows[..n], &self.rhs[..n], self.width())
    }

    fn combine(&self, coeffs: &[WittElem]) -> Cocycle {
        let n = self.ad0.ngens() * self.ad0.dim();
        let mut acc = linalg::zero_vec(self.ad0.ring(), n);
        for (a, z) in coeffs.iter().zip(&self.basis) {
            acc = linalg::add_vec(&acc, &linalg::scale_vec(z, a));
        }
        Cocycle::from_flat(self.ad0, &acc)
    }

    fn kernel_cocycles(&self) -> Vec<Vector> {
        let ker = linalg::kernel(self.ad0.ring(), &self.rows, self.width());
        let n = self.ad0.ngens() * self.ad0.dim();
        let v: Vec<Vector> = ker
            .iter()
            .map(|k| self.combine(&k[..self.basis.len()]).flat())
            .collect();
        linalg::span_basis(&v, n)
    }
}

/// A cocycle `f`, unramified outside `allowed`, such that the twist of
/// `rho_m` by `f` has the target traces and restricts to a local coboundary
/// at every locked place.
pub fn solve_trace_targets(
    g: &ModelGroup,
    rho_m: &Deformation,
    ad0: &GModule,
    targets: &[(&Place, WittElem)],
    locked: &[&Place],
    allowed: &[&str],
) -> Result<Cocycle, LiftError> {
    let mut sys = System::new(ad0, unramified_outside(g, ad0, allowed)?);
    for v in locked {
        sys.lock(v);
    }
    let nlocks = sys.rows.len();
    for (v, t) in targets {
        let phi = trace_functional(ad0, rho_m, v)?;
        let delta = crate::coeffring::embed(&trace_delta(rho_m, v, t)?, ad0.ring().degree())?;
        let row = sys.functional(&phi);
        sys.push(row, delta);
    }
    match sys.solve_prefix(sys.rows.len()) {
        Some(x) => Ok(sys.combine(&x[..sys.basis.len()])),
        None => {
            let bad = (0..targets.len())
                .find(|&i| sys.solve_prefix(nlocks + i + 1).is_none())
                .map_or_else(|| "locked places".to_string(), |i| targets[i].0.label.clone());
            Err(LiftError::Unreachable(bad))
        }
    }
}

/// Cocycles unramified outside `allowed`, with unchanged traces at `keep` and
/// local coboundary restrictions at `locked`.
pub(crate) fn constrained_cocycles(
    g: &ModelGroup,
    rho_m: &Deformation,
    ad0: &GModule,
    keep: &[&Place],
    locked: &[&Place],
    allowed: &[&str],
) -> Result<Vec<Vector>, LiftError> {
    let mut sys = System::new(ad0, unramified_outside(g, ad0, allowed)?);
    for v in locked {
        sys.lock(v);
    }
    for v in keep {
        let phi = trace_functional(ad0, rho_m, v)?;
        let row = sys.functional(&phi);
        sys.push(row, ad0.ring().zero());
    }
    Ok(sys.kernel_cocycles())
}

fn ratio_is(a: &WittElem, b: &WittElem, q: &WittElem) -> bool {
    *a == q * b || *b == q * a
}

/// `q_v != 0, +-1 mod ell`, `rhobar(tau_v) = I` and `rhobar(sigma_v)` has
/// eigenvalues in `F_ell` with ratio `q_v`.
pub fn is_nice(v: &Place, rhobar: &Deformation) -> Result<bool, LiftError> {
    let ell = rhobar.ring().ell();
    let qm = v.q % ell;
    if qm == 0 || qm == 1 || qm == ell - 1 {
        return Ok(false);
    }
    let rbar = if rhobar.level() == 1 {
        rhobar.clone()
    } else {
        rhobar.reduce_to(1)?
    };
    if !rbar.evaluate(&v.tau)?.is_identity() {
        return Ok(false);
    }
    let (_, eigs) = char_poly_eigs(&rbar.evaluate(&v.sigma)?)?;
    if eigs.len() != 2 || eigs.iter().any(|e| e.ext_degree != 1) {
        return Ok(false);
    }
    for e in &eigs {
        if !in_subring(&e.value, 1)? {
            return Ok(false);
        }
    }
    let q = rbar.ring().from_int(v.q as i64);
    Ok(ratio_is(&eigs[0].value, &eigs[1].value, &q))
}

/// Nice for the residual representation, `rho_m(tau_v) = I`, and the
/// Hensel-lifted eigenvalues of `rho_m(sigma_v)` have ratio `q_v` exactly.
pub fn is_rho_m_nice(v: &Place, rho_m: &Deformation) -> Result<bool, LiftError> {
    if !is_nice(v, rho_m)? || !rho_m.evaluate(&v.tau)?.is_identity() {
        return Ok(false);
    }
    let (_, eigs) = char_poly_eigs(&rho_m.evaluate(&v.sigma)?)?;
    if eigs.len() != 2 || eigs.iter().any(|e| !e.lifted) {
        return Ok(false);
    }
    let q = rho_m.ring().from_int(v.q as i64);
    Ok(ratio_is(&eigs[0].value, &eigs[1].value, &q))
}

/// Splitting pattern asked of the oracle: each class with whether its
/// restriction must be nonzero.
pub struct OracleConstraints<'a> {
    pub rho_m_nice: bool,
    pub module: Option<&'a GModule>,
    pub classes: Vec<(Cocycle, bool)>,
}

/// First place of the pool, in label order, satisfying the constraints.
pub fn oracle_find_places<'p>(
    g: &ModelGroup,
    pool: &[&'p Place],
    rho_m: &Deformation,
    c: &OracleConstraints,
) -> Result<&'p Place, LiftError> {
    if let Some(m) = c.module {
        let space = cohomology::cocycle_space(g, m)?;
        let reps: Vec<Vector> = c
            .classes
            .iter()
            .map(|(f, _)| space.class_of(&f.flat()))
            .filter(|v| !linalg::is_zero_vec(v))
            .collect();
        if linalg::rank(&reps, m.ngens() * m.dim()) != reps.len() {
            return Err(LiftError::DependentClasses);
        }
    } else if !c.classes.is_empty() {
        return Err(LiftError::Precondition("classes need a module".into()));
    }
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    for v in sorted {
        if c.rho_m_nice && !is_rho_m_nice(v, rho_m)? {
            continue;
        }
        let ok = c.classes.iter().all(|(f, nonzero)| {
            let m = c.module.expect("checked above");
            (restrict_and_classify(f, m, v) != LocalClass::ZeroClass) == *nonzero
        });
        if ok {
            return Ok(v);
        }
    }
    Err(LiftError::NotFound)
}

/// Validation wrapper used by the tower checks.
pub(crate) fn validated(rho: &Deformation, g: &ModelGroup) -> Result<Option<String>, LiftError> {
    Ok(validate_deformation(rho, g)?.first_failure)
}

#[cfg(test)]
mod tests;
