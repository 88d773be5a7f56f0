//! The tower driver: plans, one-level steps, logs, certificates, replay and
//! verification.

use serde::{Deserialize, Serialize};

use super::auxiliary::{adjoint_of, lift_once, obstruction, resolve_obstructions, select_auxiliary};
use super::{solve_trace_targets, twist, validated, LiftError};
use crate::coeffring::{embed, teichmuller, WittElem};
use crate::cohomology::{apply_adjustment, normalize_det, Cocycle};
use crate::galois_model::{
    check_running_hypotheses, surrogate_free, Deformation, DeformationFile, GroupFile, ModelGroup,
    Place,
};
use crate::linalg;
use crate::matlin::Mat;

pub const PLAN_SCHEMA_VERSION: u32 = 1;
pub const TOWER_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceTarget {
    pub level: u32,
    pub place: String,
    pub trace: WittElem,
}

/// Input of `build_tower`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TowerPlan {
    pub schema_version: u32,
    pub ell: u64,
    pub max_level: u32,
    pub group: GroupFile,
    pub residual: DeformationFile,
    /// `r_2, ..., r_M`: the place whose trace is pushed out of the smaller
    /// ring at each level.
    pub r_places: Vec<String>,
    /// Places whose traces stay at the integer lift of the residual trace.
    #[serde(default)]
    pub fixed_r: Vec<String>,
    #[serde(default)]
    pub s_places: Vec<String>,
    pub pool: Vec<String>,
    /// New targets leave the subring of half degree; off gives a tower with
    /// Frobenius-fixed targets.
    #[serde(default = "yes")]
    pub escape: bool,
    #[serde(default)]
    pub overrides: Vec<TraceTarget>,
    #[serde(default = "eight")]
    pub cert_dmax: usize,
}

fn yes() -> bool {
    true
}
fn eight() -> usize {
    8
}

/// Coefficient degree `2^{m-1}` at level `m`.
pub fn degree_at(m: u32) -> usize {
    1 << (m - 1)
}

impl TowerPlan {
    /// Free surrogate to level `max_level`, with `r_m = p01, p02, p03, ...`.
    pub fn free4(max_level: u32, escape: bool) -> TowerPlan {
        let (g, rho) = surrogate_free();
        let labels: Vec<String> = g.places_by_label().iter().map(|p| p.label.clone()).collect();
        TowerPlan {
            schema_version: PLAN_SCHEMA_VERSION,
            ell: g.ell,
            max_level,
            group: GroupFile::from(&g),
            residual: rho.to_file(&g),
            r_places: labels.iter().take(max_level.saturating_sub(1) as usize).cloned().collect(),
            fixed_r: vec!["p05".into()],
            s_places: Vec::new(),
            pool: labels,
            escape,
            overrides: Vec::new(),
            cert_dmax: 8,
        }
    }

    pub fn from_json(s: &str) -> Result<TowerPlan, LiftError> {
        let p: TowerPlan =
            serde_json::from_str(s).map_err(|e| LiftError::PlanInvalid(e.to_string()))?;
        if p.schema_version != PLAN_SCHEMA_VERSION {
            return Err(LiftError::PlanInvalid(format!(
                "unsupported schema version {}",
                p.schema_version
            )));
        }
        Ok(p)
    }

    pub fn group(&self) -> Result<ModelGroup, LiftError> {
        Ok(ModelGroup::try_from(self.group.clone())?)
    }

    pub fn residual(&self) -> Result<Deformation, LiftError> {
        Ok(self.residual.clone().into_deformation()?)
    }

    /// All `R` places in play at level `m`: the fixed ones and `r_2..r_m`.
    fn r_at(&self, m: u32) -> Vec<&str> {
        let mut r: Vec<&str> = self.fixed_r.iter().map(String::as_str).collect();
        r.extend(self.r_places.iter().take(m.saturating_sub(1) as usize).map(String::as_str));
        r
    }

    fn override_for(&self, level: u32, place: &str) -> Option<&WittElem> {
        self.overrides
            .iter()
            .find(|t| t.level == level && t.place == place)
            .map(|t| &t.trace)
    }

    /// Structural checks and the escape property of supplied targets.
    pub fn validate(&self) -> Result<(ModelGroup, Deformation), LiftError> {
        let bad = |s: String| Err(LiftError::PlanInvalid(s));
        let g = self.group()?;
        let rho = self.residual()?;
        if g.ell != self.ell || rho.ring().ell() != self.ell {
            return bad("ell differs between plan, group and residual".into());
        }
        if self.max_level == 0 || self.r_places.len() + 1 < self.max_level as usize {
            return bad(format!("need r_2..r_{} places", self.max_level));
        }
        if degree_at(self.max_level) > 64 {
            return bad("coefficient degree above 64".into());
        }
        let all: Vec<&String> = self
            .r_places
            .iter()
            .chain(&self.fixed_r)
            .chain(&self.s_places)
            .chain(&self.pool)
            .collect();
        for l in &all {
            if g.place(l).is_none() {
                return bad(format!("unknown place {l}"));
            }
        }
        let mut distinct: Vec<&String> = self.r_places.iter().chain(&self.fixed_r).chain(&self.s_places).collect();
        distinct.sort();
        if distinct.windows(2).any(|w| w[0] == w[1]) {
            return bad("R and S places must be distinct".into());
        }
        if !check_running_hypotheses(&rho, &g)? {
            return bad("residual representation fails the running hypotheses".into());
        }
        for l in self.r_places.iter().chain(&self.fixed_r) {
            let v = g.place(l).expect("checked");
            if !rho.evaluate(&v.tau)?.is_identity() {
                return bad(format!("R place {l} is ramified"));
            }
        }
        for t in &self.overrides {
            if t.level < 2 || t.level > self.max_level {
                return bad(format!("override at level {}", t.level));
            }
            let r = t.trace.ring();
            if r.precision() != t.level || r.degree() != degree_at(t.level) {
                return bad(format!("override at {} is not in the level-{} ring", t.place, t.level));
            }
            let is_new = self.r_places.get(t.level as usize - 2) == Some(&t.place);
            if self.escape && is_new && t.trace.in_subring_gcd(degree_at(t.level - 1)) {
                return bad(format!(
                    "target at {} for level {} is fixed by Frobenius^{}",
                    t.place,
                    t.level,
                    degree_at(t.level - 1)
                ));
            }
        }
        Ok((g, rho))
    }
}

/// Per-level record; replaying the adjustments reproduces `images`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelLog {
    pub level: u32,
    pub degree: usize,
    pub images: Vec<Mat>,
    pub ramified: Vec<String>,
    pub targets: Vec<TraceTarget>,
    /// Traces of `sigma_v` at every place, in label order.
    pub traces: Vec<TraceTarget>,
    pub lift_adjustment: Vec<WittElem>,
    pub g: Vec<WittElem>,
    pub h: Vec<WittElem>,
    pub q: Vec<String>,
    pub t: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub d: usize,
    pub place: String,
    pub level: u32,
    pub trace: WittElem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub dmax: usize,
    pub witnesses: Vec<Witness>,
    /// Degrees `d <= dmax` without a witness.
    pub uncovered: Vec<usize>,
    /// `field_of_definition` of the top-level traces.
    pub minimal_field: Option<usize>,
}

impl Certificate {
    /// Re-checks every witness with ring arithmetic alone.
    pub fn check(&self) -> Result<(), String> {
        for w in &self.witnesses {
            if w.trace.ring().precision() != w.level {
                return Err(format!("witness d = {} has the wrong level", w.d));
            }
            if w.trace.in_subring_gcd(w.d) {
                return Err(format!("witness d = {} at {} lies in the subring", w.d, w.place));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Tower {
    pub plan: TowerPlan,
    pub group: ModelGroup,
    pub levels: Vec<Deformation>,
    pub logs: Vec<LevelLog>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TowerFile {
    pub schema_version: u32,
    pub plan: TowerPlan,
    pub levels: Vec<LevelLog>,
    pub certificate: Certificate,
}

impl TowerFile {
    pub fn from_json(s: &str) -> Result<TowerFile, LiftError> {
        let f: TowerFile =
            serde_json::from_str(s).map_err(|e| LiftError::PlanInvalid(e.to_string()))?;
        if f.schema_version != TOWER_SCHEMA_VERSION {
            return Err(LiftError::PlanInvalid(format!(
                "unsupported schema version {}",
                f.schema_version
            )));
        }
        Ok(f)
    }
}

fn traces_of(g: &ModelGroup, rho: &Deformation) -> Result<Vec<TraceTarget>, LiftError> {
    g.places_by_label()
        .iter()
        .map(|p| {
            Ok(TraceTarget {
                level: rho.level(),
                place: p.label.clone(),
                trace: rho.evaluate(&p.sigma)?.trace(),
            })
        })
        .collect()
}

fn log_for(
    g: &ModelGroup,
    rho: &Deformation,
    targets: Vec<TraceTarget>,
    adjustments: [Vec<WittElem>; 3],
    q: Vec<String>,
    t: Vec<String>,
) -> Result<LevelLog, LiftError> {
    let [lift_adjustment, gv, h] = adjustments;
    Ok(LevelLog {
        level: rho.level(),
        degree: rho.degree(),
        images: rho.images().to_vec(),
        ramified: crate::galois_model::validate_deformation(rho, g)?.ramified,
        targets,
        traces: traces_of(g, rho)?,
        lift_adjustment,
        g: gv,
        h,
        q,
        t,
    })
}

fn place<'g>(g: &'g ModelGroup, l: &str) -> Result<&'g Place, LiftError> {
    g.place(l)
        .ok_or_else(|| LiftError::PlanInvalid(format!("unknown place {l}")))
}

/// The new target at `r_{m+1}`: current trace plus `ell^m` times a
/// Teichmuller generator of `F_{ell^{2^m}}`, or twice it when the first
/// choice stays inside the half-degree subring.
fn escape_target(current: &WittElem, m: u32) -> Result<WittElem, LiftError> {
    let ring = current.ring();
    let omega = teichmuller(&ring.residue_field().gen(), ring.precision())?;
    let half = ring.degree() / 2;
    let mut step = omega.times_ell_pow(m);
    for _ in 0..2 {
        let t = current + &step;
        if !t.in_subring_gcd(half) {
            return Ok(t);
        }
        step = &step + &omega.times_ell_pow(m);
    }
    Err(LiftError::Precondition("no escaping target".into()))
}

/// Lift the top level of `tower` by one, following `plan`.
pub fn tower_step(tower: &mut Tower, plan: &TowerPlan) -> Result<(), LiftError> {
    let g = tower.group.clone();
    let rho_m = tower.levels.last().expect("non-empty tower").clone();
    let m = rho_m.level();
    let d2 = degree_at(m + 1);

    // (i), (ii): embed, lift, solve relator defects
    let base = rho_m.embed(d2)?;
    let ad0 = adjoint_of(&g, &base)?;
    let (lifted, c) = lift_once(&g, &base, &ad0)?.map_err(|_| LiftError::Obstructed(m))?;

    // (iii): trace targets
    let r_now = plan.r_at(m + 1);
    let prev = tower.logs.last().expect("log per level");
    let mut targets = Vec::new();
    for l in &r_now {
        let v = place(&g, l)?;
        let trace = if let Some(t) = plan.override_for(m + 1, l) {
            t.clone()
        } else if let Some(t) = prev.targets.iter().find(|t| t.place == *l) {
            embed(&t.trace.lift_to(m + 1)?, d2)?
        } else if plan.fixed_r.iter().any(|f| f == l) {
            let tr = tower.levels[0].evaluate(&v.sigma)?.trace();
            embed(&tr.lift_to(m + 1)?, d2)?
        } else {
            let current = lifted.evaluate(&v.sigma)?.trace();
            if plan.escape {
                escape_target(&current, m)?
            } else {
                // stay Frobenius-fixed: integer lift of the previous trace
                let tr = prev
                    .traces
                    .iter()
                    .find(|t| t.place == *l)
                    .expect("trace per place");
                embed(&tr.trace.lift_to(m + 1)?, d2)?
            }
        };
        targets.push(TraceTarget {
            level: m + 1,
            place: l.to_string(),
            trace,
        });
    }
    let s_labels: Vec<&str> = plan.s_places.iter().map(String::as_str).collect();
    let mut locked_labels: Vec<&str> = prev.ramified.iter().map(String::as_str).collect();
    for s in &s_labels {
        if !locked_labels.contains(s) {
            locked_labels.push(s);
        }
    }
    let locked: Vec<&Place> = locked_labels.iter().map(|l| place(&g, l)).collect::<Result<_, _>>()?;
    let pairs: Vec<(&Place, WittElem)> = targets
        .iter()
        .map(|t| Ok((place(&g, &t.place)?, t.trace.clone())))
        .collect::<Result<_, LiftError>>()?;
    let mut allowed: Vec<&str> = locked_labels.clone();
    let mut q = Vec::new();
    let f = match solve_trace_targets(&g, &lifted, &ad0, &pairs, &locked, &allowed) {
        Err(LiftError::Unreachable(_)) => {
            let pool: Vec<&Place> = plan.pool.iter().map(|l| place(&g, l)).collect::<Result<_, _>>()?;
            let aux = select_auxiliary(&g, &lifted, &locked_labels, &r_now, &pool)?;
            q = aux.q;
            allowed.extend(q.iter().map(String::as_str));
            solve_trace_targets(&g, &lifted, &ad0, &pairs, &locked, &allowed)?
        }
        other => other?,
    };
    let mut rho = twist(&g, &lifted, &f)?;

    // (iv): clear the obstruction to the next level
    let mut h = Cocycle::zero(&ad0);
    let mut t = Vec::new();
    if m + 1 < plan.max_level && !linalg::is_zero_vec(&obstruction(&g, &rho)?) {
        let pool: Vec<&Place> = plan.pool.iter().map(|l| place(&g, l)).collect::<Result<_, _>>()?;
        let qs: Vec<&str> = q.iter().map(String::as_str).collect();
        let res = resolve_obstructions(&g, &rho, &locked_labels, &r_now, &qs, &pool)?;
        rho = twist(&g, &rho, &res.h)?;
        h = res.h;
        t = res.t;
    }

    // (v): validate
    if let Some(fail) = validated(&rho, &g)? {
        return Err(LiftError::Precondition(format!("level {}: {fail}", m + 1)));
    }
    if rho.reduce_to(m)? != base {
        return Err(LiftError::Precondition(format!("level {} does not reduce", m + 1)));
    }
    for tt in &targets {
        if rho.evaluate(&place(&g, &tt.place)?.sigma)?.trace() != tt.trace {
            return Err(LiftError::Unreachable(tt.place.clone()));
        }
    }
    let log = log_for(&g, &rho, targets, [c.flat(), f.flat(), h.flat()], q, t)?;
    if !prev.ramified.iter().all(|l| log.ramified.contains(l)) {
        return Err(LiftError::Precondition("ramification sets are not nested".into()));
    }
    tower.levels.push(rho);
    tower.logs.push(log);
    Ok(())
}

/// Runs `tower_step` up to the plan's top level and certifies the traces.
pub fn build_tower(plan: &TowerPlan) -> Result<(Tower, Certificate), LiftError> {
    let (g, rho) = plan.validate()?;
    let log = log_for(&g, &rho, Vec::new(), [Vec::new(), Vec::new(), Vec::new()], Vec::new(), Vec::new())?;
    let mut tower = Tower {
        plan: plan.clone(),
        group: g,
        levels: vec![rho],
        logs: vec![log],
    };
    while tower.levels.len() < plan.max_level as usize {
        tower_step(&mut tower, plan)?;
    }
    let cert = certificate(&tower.logs, plan.cert_dmax);
    Ok((tower, cert))
}

/// First logged trace (level ascending, places in label order) outside
/// `W(F_{ell^d})` for each `d <= dmax`.
pub fn certificate(logs: &[LevelLog], dmax: usize) -> Certificate {
    let mut witnesses = Vec::new();
    let mut uncovered = Vec::new();
    for d in 1..=dmax {
        let w = logs
            .iter()
            .flat_map(|l| &l.traces)
            .find(|t| !t.trace.in_subring_gcd(d));
        match w {
            Some(t) => witnesses.push(Witness {
                d,
                place: t.place.clone(),
                level: t.level,
                trace: t.trace.clone(),
            }),
            None => uncovered.push(d),
        }
    }
    let top: Vec<WittElem> = logs
        .last()
        .map(|l| l.traces.iter().map(|t| t.trace.clone()).collect())
        .unwrap_or_default();
    Certificate {
        dmax,
        witnesses,
        uncovered,
        minimal_field: field_of_definition(&top, dmax),
    }
}

/// Minimal `d <= dmax` with every trace fixed by `Frobenius^d`.
pub fn field_of_definition(traces: &[WittElem], dmax: usize) -> Option<usize> {
    (1..=dmax).find(|&d| traces.iter().all(|t| t.in_subring_gcd(d)))
}

impl Tower {
    pub fn to_file(&self, certificate: &Certificate) -> TowerFile {
        TowerFile {
            schema_version: TOWER_SCHEMA_VERSION,
            plan: self.plan.clone(),
            levels: self.logs.clone(),
            certificate: certificate.clone(),
        }
    }
}

fn cocycle_of(ad0: &crate::cohomology::GModule, v: &[WittElem]) -> Cocycle {
    if v.is_empty() {
        Cocycle::zero(ad0)
    } else {
        Cocycle::from_flat(ad0, v)
    }
}

/// Re-applies the logged adjustments to the residual representation, with
/// no solving.
pub fn replay_log(file: &TowerFile) -> Result<Vec<Deformation>, LiftError> {
    let g = file.plan.group()?;
    let mut levels = vec![file.plan.residual()?];
    for log in file.levels.iter().skip(1) {
        let prev = levels.last().expect("residual");
        let m = prev.level();
        let base = prev.embed(log.degree)?;
        let ad0 = adjoint_of(&g, &base)?;
        let lifts = normalize_det(&g, &base.raw_lift(m + 1)?)?;
        let images = apply_adjustment(&lifts, &cocycle_of(&ad0, &log.lift_adjustment), m)?;
        let ring = images[0].ring().clone();
        let mut rho = Deformation::new(&ring, images)?;
        for adj in [&log.g, &log.h] {
            rho = Deformation::new(
                rho.ring(),
                apply_adjustment(rho.images(), &cocycle_of(&ad0, adj), m)?,
            )?;
        }
        levels.push(rho);
    }
    Ok(levels)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Independent re-validation of a tower file; every failing invariant is
/// named.
pub fn verify_tower(file: &TowerFile) -> Result<VerifyReport, LiftError> {
    let g = file.plan.group()?;
    let mut failures = Vec::new();
    let mut prev: Option<(Deformation, &LevelLog)> = None;
    for (i, log) in file.levels.iter().enumerate() {
        let m = i as u32 + 1;
        if log.level != m || log.degree != degree_at(m) {
            failures.push(format!("level {m}: level or degree mismatch"));
            continue;
        }
        let ring = match log.images.first() {
            Some(x) => x.ring().clone(),
            None => {
                failures.push(format!("level {m}: no images"));
                continue;
            }
        };
        let rho = Deformation::new(&ring, log.images.clone())?;
        if rho.level() != m || rho.degree() != log.degree {
            failures.push(format!("level {m}: images live in the wrong ring"));
            continue;
        }
        let rep = crate::galois_model::validate_deformation(&rho, &g)?;
        if let Some(f) = rep.first_failure {
            failures.push(format!("level {m}: {f}"));
        }
        if rep.ramified != log.ramified {
            failures.push(format!("level {m}: ramification set differs from the log"));
        }
        if let Some((p, plog)) = &prev {
            if rho.reduce_to(m - 1)? != p.embed(log.degree)? {
                failures.push(format!("level {m}: reduction to level {} differs", m - 1));
            }
            if !plog.ramified.iter().all(|l| log.ramified.contains(l)) {
                failures.push(format!("level {m}: ramification sets not nested"));
            }
        }
        for t in &log.targets {
            match g.place(&t.place) {
                Some(v) if rho.evaluate(&v.sigma)?.trace() == t.trace => {}
                _ => failures.push(format!("level {m}: trace target at {} not met", t.place)),
            }
        }
        for t in &log.traces {
            match g.place(&t.place) {
                Some(v) if rho.evaluate(&v.sigma)?.trace() == t.trace => {}
                _ => failures.push(format!("level {m}: logged trace at {} is wrong", t.place)),
            }
        }
        prev = Some((rho, log));
    }
    match replay_log(file) {
        Ok(levels) => {
            for (rho, log) in levels.iter().zip(&file.levels) {
                if rho.images() != log.images.as_slice() {
                    failures.push(format!("level {}: replay differs from the log", log.level));
                }
            }
        }
        Err(e) => failures.push(format!("replay failed: {e}")),
    }
    if let Err(e) = file.certificate.check() {
        failures.push(format!("certificate: {e}"));
    }
    if certificate(&file.levels, file.certificate.dmax) != file.certificate {
        failures.push("certificate differs from the logged traces".into());
    }
    Ok(VerifyReport {
        passed: failures.is_empty(),
        failures,
    })
}
