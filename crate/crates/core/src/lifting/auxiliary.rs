//! Auxiliary places: localization ranks, greedy choice of `Q`, and removal of
//! lifting obstructions by twisting.

use serde::Serialize;

use super::{constrained_cocycles, is_rho_m_nice, twist, LiftError};
use crate::cohomology::{
    apply_adjustment, build_module, coboundary_basis, lift_solve, local_cohomology, normalize_det,
    relator_defects, restriction_vector, sha_kernel_unramified, unramified_outside, Cocycle, GModule,
    LiftOutcome, Twist,
};
use crate::galois_model::{Deformation, ModelGroup, Place};
use crate::linalg::{self, Vector};

/// Dimensions and rank of a localization map on `H^1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MapRank {
    pub source: usize,
    pub target: usize,
    pub rank: usize,
}

impl MapRank {
    pub fn is_iso(&self) -> bool {
        self.rank == self.source && self.rank == self.target
    }
    fn deficiency(&self) -> usize {
        (self.source - self.rank) + (self.target - self.rank)
    }
}

fn places<'g>(g: &'g ModelGroup, labels: &[&str]) -> Result<Vec<&'g Place>, LiftError> {
    labels
        .iter()
        .map(|l| {
            g.place(l)
                .ok_or_else(|| LiftError::Precondition(format!("unknown place {l}")))
        })
        .collect()
}

/// `H^1(G_X, M) -> (+)_v H^1(G_v, M)` (or `H^1_nr` where flagged).
fn map_rank(
    g: &ModelGroup,
    m: &GModule,
    allowed: &[&str],
    targets: &[(&Place, bool)],
) -> Result<MapRank, LiftError> {
    let z = unramified_outside(g, m, allowed)?;
    let b = coboundary_basis(m);
    let mut target = 0;
    let mut locals = Vec::new();
    for (v, nr) in targets {
        let loc = local_cohomology(m, v)?;
        target += if *nr { loc.h1_nr() } else { loc.h1() };
        locals.push(loc);
    }
    let images: Vec<Vector> = z
        .iter()
        .map(|f| {
            let c = Cocycle::from_flat(m, f);
            targets
                .iter()
                .zip(&locals)
                .flat_map(|((v, _), loc)| linalg::reduce_by(&loc.b1, &restriction_vector(&c, m, v)))
                .collect()
        })
        .collect();
    let width: usize = locals.iter().map(|l| l.width).sum();
    let rank = if width == 0 { 0 } else { linalg::rank(&images, width) };
    Ok(MapRank {
        source: z.len() - b.len(),
        target,
        rank,
    })
}

fn modules(g: &ModelGroup, rho_m: &Deformation) -> Result<(GModule, GModule), LiftError> {
    let rbar = rho_m.reduce_to(1)?;
    let d = rho_m.degree();
    Ok((
        build_module(&rbar, g, d, Twist::Adjoint)?,
        build_module(&rbar, g, d, Twist::CartierDual)?,
    ))
}

/// The three localization maps for `S`, `R`, `Q`: the dual map onto `Q`,
/// the adjoint map onto `S u R`, and the adjoint map from `S u Q` onto
/// `S` plus the unramified classes at `R`.
pub fn localization_ranks(
    g: &ModelGroup,
    rho_m: &Deformation,
    s: &[&str],
    r: &[&str],
    q: &[&str],
) -> Result<[MapRank; 3], LiftError> {
    let (ad, dual) = modules(g, rho_m)?;
    let (sp, rp, qp) = (places(g, s)?, places(g, r)?, places(g, q)?);
    let srq: Vec<&str> = s.iter().chain(r).chain(q).copied().collect();
    let sq: Vec<&str> = s.iter().chain(q).copied().collect();
    fn full<'a>(v: &[&'a Place]) -> Vec<(&'a Place, bool)> {
        v.iter().map(|p| (*p, false)).collect()
    }
    let m3 = map_rank(g, &dual, &srq, &full(&qp))?;
    let sr: Vec<&Place> = sp.iter().chain(&rp).copied().collect();
    let m4 = map_rank(g, &ad, &srq, &full(&sr))?;
    let mut t5 = full(&sp);
    t5.extend(rp.iter().map(|p| (*p, true)));
    let m5 = map_rank(g, &ad, &sq, &t5)?;
    Ok([m3, m4, m5])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Auxiliary {
    pub q: Vec<String>,
    pub ranks: [MapRank; 3],
}

/// Greedily adds `rho_m`-nice pool places, in label order, while the total
/// rank deficiency of the three maps drops, until all are isomorphisms.
pub fn select_auxiliary(
    g: &ModelGroup,
    rho_m: &Deformation,
    s: &[&str],
    r: &[&str],
    pool: &[&Place],
) -> Result<Auxiliary, LiftError> {
    let (ad, dual) = modules(g, rho_m)?;
    let sp = places(g, s)?;
    for (m, name) in [(&ad, "Ad0"), (&dual, "Ad0*")] {
        let sha = sha_kernel_unramified(g, m, &sp)?;
        if !sha.basis.is_empty() {
            return Err(LiftError::ShaNotTrivial {
                module: name,
                dim: sha.basis.len(),
            });
        }
    }
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    let mut q: Vec<&str> = Vec::new();
    let mut ranks = localization_ranks(g, rho_m, s, r, &q)?;
    let score = |rk: &[MapRank; 3]| rk.iter().map(|m| m.deficiency()).sum::<usize>();
    while score(&ranks) > 0 {
        let mut advanced = false;
        for v in &sorted {
            let l = v.label.as_str();
            if s.contains(&l) || r.contains(&l) || q.contains(&l) || !is_rho_m_nice(v, rho_m)? {
                continue;
            }
            let mut trial = q.clone();
            trial.push(l);
            let rk = localization_ranks(g, rho_m, s, r, &trial)?;
            if score(&rk) < score(&ranks) {
                q = trial;
                ranks = rk;
                advanced = true;
                break;
            }
        }
        if !advanced {
            return Err(LiftError::PoolExhausted);
        }
    }
    Ok(Auxiliary {
        q: q.iter().map(|s| s.to_string()).collect(),
        ranks,
    })
}

/// Normalised raw lift one level up, fixed by `lift_solve` when possible.
pub(crate) fn lift_once(
    g: &ModelGroup,
    rho_m: &Deformation,
    ad0: &GModule,
) -> Result<Result<(Deformation, Cocycle), Vector>, LiftError> {
    let m = rho_m.level();
    let lifts = normalize_det(g, &rho_m.raw_lift(m + 1)?)?;
    let defects = relator_defects(g, rho_m, &lifts)?;
    Ok(match lift_solve(g, ad0, &defects)? {
        LiftOutcome::Adjust(c) => {
            let images = apply_adjustment(&lifts, &c, m)?;
            let ring = images[0].ring().clone();
            Ok((Deformation::new(&ring, images)?, c))
        }
        LiftOutcome::Obstructed(cls) => Err(cls),
    })
}

pub(crate) fn adjoint_of(g: &ModelGroup, rho: &Deformation) -> Result<GModule, LiftError> {
    Ok(build_module(&rho.reduce_to(1)?, g, rho.degree(), Twist::Adjoint)?)
}

/// Obstruction to lifting `rho_m` one level: relator defects modulo the
/// boundaries of generator adjustments. Zero when unobstructed.
pub fn obstruction(g: &ModelGroup, rho_m: &Deformation) -> Result<Vector, LiftError> {
    let ad0 = adjoint_of(g, rho_m)?;
    Ok(match lift_once(g, rho_m, &ad0)? {
        Ok(_) => linalg::zero_vec(ad0.ring(), g.relators.len() * 3),
        Err(cls) => cls,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub h: Cocycle,
    /// Places newly ramified by the twist.
    pub t: Vec<String>,
}

/// A twist `h`, unramified outside `S u Q u T`, keeping traces at `R` and
/// local classes at `S`, after which `rho_m` lifts one more level.
pub fn resolve_obstructions(
    g: &ModelGroup,
    rho_m: &Deformation,
    s: &[&str],
    r: &[&str],
    q: &[&str],
    pool: &[&Place],
) -> Result<Resolution, LiftError> {
    let ad0 = adjoint_of(g, rho_m)?;
    let ob0 = obstruction(g, rho_m)?;
    if linalg::is_zero_vec(&ob0) {
        return Ok(Resolution {
            h: Cocycle::zero(&ad0),
            t: Vec::new(),
        });
    }
    let sp = places(g, s)?;
    let rp = places(g, r)?;
    let mut sorted = pool.to_vec();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    let mut candidates = sorted.iter().filter(|v| {
        let l = v.label.as_str();
        !s.contains(&l) && !r.contains(&l) && !q.contains(&l)
    });
    let mut extra: Vec<&str> = Vec::new();
    let mut tried_nice = false;
    loop {
        let allowed: Vec<&str> = s.iter().chain(q).chain(&extra).copied().collect();
        if let Some(h) = try_resolve(g, rho_m, &ad0, &ob0, &rp, &sp, &allowed)? {
            let twisted = twist(g, rho_m, &h)?;
            let t = extra
                .iter()
                .filter(|l| {
                    let v = g.place(l).expect("pool place");
                    !twisted.evaluate(&v.tau).is_ok_and(|m| m.is_identity())
                })
                .map(|l| l.to_string())
                .collect();
            return Ok(Resolution { h, t });
        }
        let next = loop {
            match candidates.next() {
                None => break None,
                Some(v) if is_rho_m_nice(v, rho_m)? => break Some(*v),
                Some(_) => {}
            }
        };
        match next {
            Some(v) => {
                tried_nice = true;
                extra.push(v.label.as_str());
            }
            None if tried_nice => return Err(LiftError::PoolExhausted),
            None => return Err(LiftError::SupportConditionUnavailable),
        }
    }
}

// Linear ansatz on the obstruction as a function of the twist, verified by
// recomputing the obstruction of the twisted representation.
fn try_resolve(
    g: &ModelGroup,
    rho_m: &Deformation,
    ad0: &GModule,
    ob0: &[crate::coeffring::WittElem],
    keep: &[&Place],
    locked: &[&Place],
    allowed: &[&str],
) -> Result<Option<Cocycle>, LiftError> {
    let basis = constrained_cocycles(g, rho_m, ad0, keep, locked, allowed)?;
    if basis.is_empty() {
        return Ok(None);
    }
    let mut cols = Vec::with_capacity(basis.len());
    for z in &basis {
        let c = Cocycle::from_flat(ad0, z);
        let ob = obstruction(g, &twist(g, rho_m, &c)?)?;
        cols.push(linalg::sub_vec(&ob, ob0));
    }
    let rows = crate::cohomology::columns(&cols, ob0.len());
    let rhs: Vector = ob0.iter().map(|x| -x).collect();
    let Some(a) = linalg::solve(ad0.ring(), &rows, &rhs, basis.len()) else {
        return Ok(None);
    };
    let mut acc = linalg::zero_vec(ad0.ring(), ad0.ngens() * ad0.dim());
    for (ai, z) in a.iter().zip(&basis) {
        acc = linalg::add_vec(&acc, &linalg::scale_vec(z, ai));
    }
    let h = Cocycle::from_flat(ad0, &acc);
    let fixed = twist(g, rho_m, &h)?;
    Ok(linalg::is_zero_vec(&obstruction(g, &fixed)?).then_some(h))
}
