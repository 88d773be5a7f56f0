//! Finitely presented stand-ins for the absolute Galois group: generators,
//! relators, decorated places `(sigma_v, tau_v, q_v)`, a cyclotomic character
//! given as data, and level-`m` deformations with determinant `epsilon`.

mod surrogates;
mod word;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeffring::{embed, RingError, WittElem, WittRing};
use crate::matlin::{gl2_closure, Mat, MatError};

pub use surrogates::{surrogate_free, surrogate_tame};
pub use word::{Letter, Word};

pub const GROUP_SCHEMA_VERSION: u32 = 1;
pub const DEFORMATION_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("cannot parse word {0:?}")]
    Parse(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mat(#[from] MatError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// A place with its Frobenius word, tame generator word and norm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    pub label: String,
    pub sigma: Word,
    pub tau: Word,
    pub q: u64,
    /// Bookkeeping tags such as `S`, `pool`, `R2`, `Q3`.
    pub tags: Vec<String>,
}

/// Finitely presented group with places and `epsilon` on generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelGroup {
    pub name: String,
    pub ell: u64,
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
    pub places: Vec<Place>,
    /// `epsilon(g)` as an integer prime to `ell`, read modulo `ell^m`.
    pub epsilon: Vec<i64>,
}

impl ModelGroup {
    pub fn ngens(&self) -> usize {
        self.generators.len()
    }

    pub fn gen_index(&self, name: &str) -> Result<usize, ModelError> {
        self.generators
            .iter()
            .position(|g| g == name)
            .ok_or_else(|| ModelError::UnknownGenerator(name.to_string()))
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, ModelError> {
        Word::parse(s, &self.generators)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.format(&self.generators)
    }

    pub fn place(&self, label: &str) -> Option<&Place> {
        self.places.iter().find(|p| p.label == label)
    }

    /// Places sorted by label.
    pub fn places_by_label(&self) -> Vec<&Place> {
        let mut v: Vec<&Place> = self.places.iter().collect();
        v.sort_by(|a, b| a.label.cmp(&b.label));
        v
    }

    /// `epsilon(w)` in the given ring.
    pub fn epsilon_word(&self, w: &Word, ring: &WittRing) -> Result<WittElem, ModelError> {
        let mut acc = ring.one();
        for l in &w.0 {
            let e = ring.from_int(
                *self
                    .epsilon
                    .get(l.gen)
                    .ok_or_else(|| ModelError::UnknownGenerator(format!("#{}", l.gen)))?,
            );
            acc = if l.inv { &acc * &e.inv()? } else { &acc * &e };
        }
        Ok(acc)
    }

    /// Consistency of the data: `epsilon(relator) = 1`, `epsilon(tau_v) = 1`
    /// and `epsilon(sigma_v) = q_v` modulo `ell^m` for all `m <= max_level`.
    pub fn check_epsilon(&self, max_level: u32) -> Result<(), ModelError> {
        for m in 1..=max_level {
            let ring = WittRing::new(self.ell, 1, m)?;
            for (i, r) in self.relators.iter().enumerate() {
                if !self.epsilon_word(r, &ring)?.is_one() {
                    return Err(ModelError::Invalid(format!(
                        "epsilon(relator {i}) != 1 mod {}^{m}",
                        self.ell
                    )));
                }
            }
            for p in &self.places {
                if !self.epsilon_word(&p.tau, &ring)?.is_one() {
                    return Err(ModelError::Invalid(format!(
                        "epsilon(tau_{}) != 1 mod {}^{m}",
                        p.label, self.ell
                    )));
                }
                if self.epsilon_word(&p.sigma, &ring)? != ring.from_int(p.q as i64) {
                    return Err(ModelError::Invalid(format!(
                        "epsilon(sigma_{}) != q mod {}^{m}",
                        p.label, self.ell
                    )));
                }
            }
        }
        Ok(())
    }

    /// The word `sigma tau sigma^{-1} tau^{-q}` of a place.
    pub fn tame_relator(&self, p: &Place) -> Word {
        let mut w = p.sigma.clone();
        w = w.concat(&p.tau);
        w = w.concat(&p.sigma.inverse());
        w.concat(&p.tau.inverse().power(p.q as usize))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GroupFile::from(self)).expect("serialisable")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let f: GroupFile =
            serde_json::from_str(s).map_err(|e| ModelError::Invalid(e.to_string()))?;
        f.try_into()
    }
}

/// On-disk group description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupFile {
    pub schema_version: u32,
    pub name: String,
    pub ell: u64,
    pub generators: Vec<String>,
    pub relators: Vec<String>,
    pub places: Vec<PlaceFile>,
    /// `epsilon` per generator, in generator order.
    pub epsilon: Vec<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlaceFile {
    pub label: String,
    pub sigma: String,
    pub tau: String,
    pub q: u64,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl From<&ModelGroup> for GroupFile {
    fn from(g: &ModelGroup) -> Self {
        GroupFile {
            schema_version: GROUP_SCHEMA_VERSION,
            name: g.name.clone(),
            ell: g.ell,
            generators: g.generators.clone(),
            relators: g.relators.iter().map(|r| g.format_word(r)).collect(),
            places: g
                .places
                .iter()
                .map(|p| PlaceFile {
                    label: p.label.clone(),
                    sigma: g.format_word(&p.sigma),
                    tau: g.format_word(&p.tau),
                    q: p.q,
                    tags: p.tags.clone(),
                })
                .collect(),
            epsilon: g.epsilon.clone(),
        }
    }
}

impl TryFrom<GroupFile> for ModelGroup {
    type Error = ModelError;
    fn try_from(f: GroupFile) -> Result<Self, ModelError> {
        if f.schema_version != GROUP_SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(f.schema_version));
        }
        if f.epsilon.len() != f.generators.len() {
            return Err(ModelError::Invalid("one epsilon value per generator".into()));
        }
        let parse = |s: &str| Word::parse(s, &f.generators);
        let relators = f
            .relators
            .iter()
            .map(|r| parse(r))
            .collect::<Result<_, _>>()?;
        let places = f
            .places
            .iter()
            .map(|p| {
                if p.q < 2 || p.q == f.ell {
                    return Err(ModelError::Invalid(format!("bad norm at {}", p.label)));
                }
                Ok(Place {
                    label: p.label.clone(),
                    sigma: parse(&p.sigma)?,
                    tau: parse(&p.tau)?,
                    q: p.q,
                    tags: p.tags.clone(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(ModelGroup {
            name: f.name,
            ell: f.ell,
            generators: f.generators,
            relators,
            places,
            epsilon: f.epsilon,
        })
    }
}

/// Generator images in `GL_2(W(F_{ell^d})/ell^m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deformation {
    ring: WittRing,
    images: Vec<Mat>,
    inverses: Vec<Mat>,
}

impl Deformation {
    pub fn new(ring: &WittRing, images: Vec<Mat>) -> Result<Self, ModelError> {
        for g in &images {
            if g.ring() != ring || g.dim() != 2 {
                return Err(ModelError::Invalid(format!(
                    "image {g} is not a 2x2 matrix over {ring}"
                )));
            }
        }
        let inverses = images
            .iter()
            .map(|g| g.inverse())
            .collect::<Result<_, _>>()?;
        Ok(Deformation {
            ring: ring.clone(),
            images,
            inverses,
        })
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }
    pub fn level(&self) -> u32 {
        self.ring.precision()
    }
    pub fn degree(&self) -> usize {
        self.ring.degree()
    }
    pub fn images(&self) -> &[Mat] {
        &self.images
    }
    pub fn image(&self, i: usize) -> &Mat {
        &self.images[i]
    }

    pub fn evaluate(&self, w: &Word) -> Result<Mat, ModelError> {
        let mut acc = Mat::identity(&self.ring, 2);
        for l in &w.0 {
            let g = if l.inv {
                self.inverses.get(l.gen)
            } else {
                self.images.get(l.gen)
            }
            .ok_or_else(|| ModelError::UnknownGenerator(format!("#{}", l.gen)))?;
            acc = acc.mul(g);
        }
        Ok(acc)
    }

    pub fn reduce_to(&self, m: u32) -> Result<Deformation, ModelError> {
        let ring = self.ring.with_precision(m)?;
        let images = self
            .images
            .iter()
            .map(|g| g.reduce_to(m))
            .collect::<Result<_, _>>()?;
        Deformation::new(&ring, images)
    }

    /// Coefficients pushed into `W(F_{ell^{d2}})`.
    pub fn embed(&self, d2: usize) -> Result<Deformation, ModelError> {
        let ring = self.ring.with_degree(d2)?;
        let images = self
            .images
            .iter()
            .map(|g| g.embed(d2))
            .collect::<Result<_, _>>()?;
        Deformation::new(&ring, images)
    }

    /// Coefficient-wise lift to a higher level; not a homomorphism in general.
    pub fn raw_lift(&self, m: u32) -> Result<Vec<Mat>, ModelError> {
        Ok(self
            .images
            .iter()
            .map(|g| g.lift_to(m))
            .collect::<Result<_, _>>()?)
    }

    pub fn to_file(&self, g: &ModelGroup) -> DeformationFile {
        DeformationFile {
            schema_version: DEFORMATION_SCHEMA_VERSION,
            ell: self.ring.ell(),
            level: self.level(),
            degree: self.degree(),
            generators: g.generators.clone(),
            images: self.images.clone(),
        }
    }
}

/// On-disk deformation: images listed in generator order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DeformationFile {
    pub schema_version: u32,
    pub ell: u64,
    pub level: u32,
    pub degree: usize,
    pub generators: Vec<String>,
    pub images: Vec<Mat>,
}

impl DeformationFile {
    pub fn into_deformation(self) -> Result<Deformation, ModelError> {
        if self.schema_version != DEFORMATION_SCHEMA_VERSION {
            return Err(ModelError::SchemaVersion(self.schema_version));
        }
        let ring = WittRing::new(self.ell, self.degree, self.level)?;
        if self.images.len() != self.generators.len() {
            return Err(ModelError::Invalid("one image per generator".into()));
        }
        Deformation::new(&ring, self.images)
    }
}

/// Product of generator images along a word; the empty word gives `I`.
pub fn evaluate_word(rho: &Deformation, w: &Word) -> Result<Mat, ModelError> {
    rho.evaluate(w)
}

/// `epsilon` at the level and degree of a deformation.
pub fn epsilon_in(rho: &Deformation, g: &ModelGroup, w: &Word) -> Result<WittElem, ModelError> {
    let base = WittRing::new(g.ell, 1, rho.level())?;
    Ok(embed(&g.epsilon_word(w, &base)?, rho.degree())?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub first_failure: Option<String>,
    /// Places `v` with `rho(tau_v) != I`, in label order.
    pub ramified: Vec<String>,
}

/// Relators map to `I`, `det = epsilon` on generators, and the ramification set.
pub fn validate_deformation(rho: &Deformation, g: &ModelGroup) -> Result<ValidationReport, ModelError> {
    if rho.images.len() != g.ngens() {
        return Err(ModelError::Invalid(format!(
            "{} images for {} generators",
            rho.images.len(),
            g.ngens()
        )));
    }
    let mut failure = None;
    for (i, r) in g.relators.iter().enumerate() {
        if !rho.evaluate(r)?.is_identity() {
            failure = Some(format!("relator {i} ({}) is not I", g.format_word(r)));
            break;
        }
    }
    if failure.is_none() {
        for (i, img) in rho.images.iter().enumerate() {
            let eps = epsilon_in(rho, g, &Word(vec![Letter { gen: i, inv: false }]))?;
            if img.det() != eps {
                failure = Some(format!(
                    "det(rho({})) = {} but epsilon = {}",
                    g.generators[i],
                    img.det(),
                    eps
                ));
                break;
            }
        }
    }
    let mut ramified = Vec::new();
    for p in g.places_by_label() {
        if !rho.evaluate(&p.tau)?.is_identity() {
            ramified.push(p.label.clone());
        }
    }
    Ok(ValidationReport {
        passed: failure.is_none(),
        first_failure: failure,
        ramified,
    })
}

/// Level one, degree one, surjective onto `GL_2(F_ell)`, `det = epsilon`,
/// `ell >= 5`.
pub fn check_running_hypotheses(rhobar: &Deformation, g: &ModelGroup) -> Result<bool, ModelError> {
    if rhobar.level() != 1 || rhobar.degree() != 1 || g.ell < 5 {
        return Ok(false);
    }
    let closure = gl2_closure(rhobar.images())?;
    if !closure.is_full() {
        return Ok(false);
    }
    Ok(validate_deformation(rhobar, g)?.passed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Ramification {
    pub unramified: bool,
    /// `rho(tau_v)` unipotent.
    pub unipotent: bool,
}

pub fn is_unramified_at(rho: &Deformation, v: &Place) -> Result<Ramification, ModelError> {
    let t = rho.evaluate(&v.tau)?;
    Ok(Ramification {
        unramified: t.is_identity(),
        unipotent: t.is_unipotent(),
    })
}
