//! The two shipped surrogate groups, both at `ell = 5`, with their residual
//! representations.

use super::{Deformation, ModelGroup, Place, Word};
use crate::coeffring::WittRing;
use crate::matlin::Mat;

const ELL: u64 = 5;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn place(g: &[String], label: &str, sigma: &str, tau: &str, q: u64, tags: &[&str]) -> Place {
    Place {
        label: label.to_string(),
        sigma: Word::parse(sigma, g).expect("shipped word"),
        tau: Word::parse(tau, g).expect("shipped word"),
        q,
        tags: names(tags),
    }
}

fn mat(f: &WittRing, e: [i64; 4]) -> Mat {
    Mat::from_ints(f, &e).expect("2x2")
}

/// Free group on `x1..x4` with eight unramified places whose Frobenius words
/// are positive words and whose norms are `epsilon(sigma)`. No relators, so
/// every lifting obstruction vanishes.
pub fn surrogate_free() -> (ModelGroup, Deformation) {
    let gens = names(&["x1", "x2", "x3", "x4"]);
    let epsilon = vec![7, 11, 31, 13];
    let pool = ["pool"];
    let places = vec![
        place(&gens, "p01", "x1", "1", 7, &pool),
        place(&gens, "p02", "x4", "1", 13, &pool),
        place(&gens, "p03", "x1*x2", "1", 77, &pool),
        place(&gens, "p04", "x4*x2", "1", 143, &pool),
        place(&gens, "p05", "x2", "1", 11, &pool),
        place(&gens, "p06", "x1^2*x4", "1", 637, &pool),
        place(&gens, "p07", "x3", "1", 31, &pool),
        place(&gens, "p08", "x2*x1", "1", 77, &pool),
    ];
    let group = ModelGroup {
        name: "free4".into(),
        ell: ELL,
        generators: gens,
        relators: Vec::new(),
        places,
        epsilon,
    };
    let f = WittRing::field(ELL, 1).expect("F_5");
    let rho = Deformation::new(
        &f,
        vec![
            mat(&f, [2, 0, 0, 1]),
            mat(&f, [1, 1, 0, 1]),
            mat(&f, [0, 1, -1, 0]),
            mat(&f, [3, 0, 0, 1]),
        ],
    )
    .expect("invertible images");
    (group, rho)
}

/// Generators `a, b` and a tame pair `s_i, t_i` for each of six places, with
/// relators `s_i t_i s_i^{-1} t_i^{-q_i}`. Place `v3` is residually ramified.
pub fn surrogate_tame() -> (ModelGroup, Deformation) {
    let qs = [7u64, 13, 17, 11, 23, 19];
    let mut gens = names(&["a", "b"]);
    for i in 1..=6 {
        gens.push(format!("s{i}"));
        gens.push(format!("t{i}"));
    }
    let mut epsilon = vec![1, 1];
    let mut relators = Vec::new();
    let mut places = Vec::new();
    for (i, &q) in qs.iter().enumerate() {
        let k = i + 1;
        epsilon.push(q as i64);
        epsilon.push(1);
        relators.push(
            Word::parse(&format!("s{k}*t{k}*s{k}^-1*t{k}^-{q}"), &gens).expect("shipped word"),
        );
        let tags: &[&str] = if k == 3 { &["S"] } else { &["pool"] };
        places.push(place(
            &gens,
            &format!("v{k}"),
            &format!("s{k}"),
            &format!("t{k}"),
            q,
            tags,
        ));
    }
    let group = ModelGroup {
        name: "tame6".into(),
        ell: ELL,
        generators: gens,
        relators,
        places,
        epsilon,
    };
    let f = WittRing::field(ELL, 1).expect("F_5");
    let id = mat(&f, [1, 0, 0, 1]);
    let unip = mat(&f, [1, 1, 0, 1]);
    let s_images = [
        mat(&f, [2, 0, 0, 1]),
        mat(&f, [3, 0, 0, 1]),
        mat(&f, [2, 0, 0, 1]),
        unip.clone(),
        mat(&f, [3, 0, 0, 1]),
        mat(&f, [4, 0, 0, 1]),
    ];
    let mut images = vec![unip.clone(), mat(&f, [0, 1, -1, 0])];
    for (k, s) in s_images.into_iter().enumerate() {
        images.push(s);
        images.push(if k == 2 { unip.clone() } else { id.clone() });
    }
    let rho = Deformation::new(&f, images).expect("invertible images");
    (group, rho)
}
