use proptest::prelude::*;

use super::*;
use crate::coeffring::{embed, teichmuller, WittRing};
use crate::cohomology::{ad0_matrix, build_module, cocycle_space, fox_matrix, Twist};
use crate::galois_model::{surrogate_free, surrogate_tame, Word};

fn free_level2() -> (ModelGroup, Deformation, GModule) {
    let (g, rhobar) = surrogate_free();
    let r = WittRing::new(5, 1, 2).unwrap();
    let imgs = [[7, 0, 0, 1], [11, 1, 0, 1], [0, 1, -31, 0], [13, 0, 0, 1]]
        .iter()
        .map(|e| Mat::from_ints(&r, e).unwrap())
        .collect();
    let rho = Deformation::new(&r, imgs).unwrap();
    let ad0 = build_module(&rhobar, &g, 1, Twist::Adjoint).unwrap();
    (g, rho, ad0)
}

fn ints(f: &WittRing, v: &[i64]) -> Vector {
    v.iter().map(|&x| f.from_int(x)).collect()
}

/// `<s, t | s t s^-1 t^-q>` with one place `v`, `rho(s) = s_img`, `rho(t) = I`.
fn pair_group(q: u64, s_img: [i64; 4], level: u32) -> (ModelGroup, Deformation) {
    let gens = vec!["s".to_string(), "t".to_string()];
    let g = ModelGroup {
        name: "pair".into(),
        ell: 5,
        relators: vec![Word::parse(&format!("s*t*s^-1*t^-{q}"), &gens).unwrap()],
        places: vec![Place {
            label: "v".into(),
            sigma: Word::gen(0),
            tau: Word::gen(1),
            q,
            tags: Vec::new(),
        }],
        epsilon: vec![s_img[0] * s_img[3] - s_img[1] * s_img[2], 1],
        generators: gens,
    };
    let r = WittRing::new(5, 1, level).unwrap();
    let rho = Deformation::new(&r, vec![Mat::from_ints(&r, &s_img).unwrap(), Mat::identity(&r, 2)])
        .unwrap();
    (g, rho)
}

/// One generator `x` and places with the empty tame word.
fn cyclic_group(x: [i64; 4], eps: i64, places: &[(&str, &str, u64)]) -> (ModelGroup, Deformation) {
    let gens = vec!["x".to_string()];
    let g = ModelGroup {
        name: "cyclic".into(),
        ell: 5,
        relators: Vec::new(),
        places: places
            .iter()
            .map(|(l, s, q)| Place {
                label: l.to_string(),
                sigma: Word::parse(s, &gens).unwrap(),
                tau: Word::identity(),
                q: *q,
                tags: Vec::new(),
            })
            .collect(),
        epsilon: vec![eps],
        generators: gens,
    };
    let f = WittRing::field(5, 1).unwrap();
    let rho = Deformation::new(&f, vec![Mat::from_ints(&f, &x).unwrap()]).unwrap();
    (g, rho)
}

fn lift_cocycle_value(ring: &WittRing, v: &[WittElem]) -> Mat {
    let lifted: Vector = v.iter().map(|x| x.lift_to(ring.precision()).unwrap()).collect();
    ad0_matrix(ring, &lifted)
}

#[test]
fn zero_twist_is_identity() {
    let (g, rho, ad0) = free_level2();
    assert_eq!(twist(&g, &rho, &Cocycle::zero(&ad0)).unwrap(), rho);
    assert!(matches!(
        twist(&g, &rho.reduce_to(1).unwrap(), &Cocycle::zero(&ad0)),
        Err(LiftError::Precondition(_))
    ));
}

#[test]
fn coboundary_twist_is_conjugation() {
    let (g, rho, ad0) = free_level2();
    let f = ad0.ring();
    let r = rho.ring();
    for x in [ints(f, &[1, 0, 0]), ints(f, &[0, 2, 4]), ints(f, &[3, 1, 2])] {
        let tw = twist(&g, &rho, &Cocycle::coboundary(&ad0, &x)).unwrap();
        // g -> (I + ell (g x - x)) rho(g) is conjugation by I - ell x
        let c = Mat::identity(r, 2).sub(&lift_cocycle_value(r, &x).times_ell_pow(1));
        let ci = c.inverse().unwrap();
        for i in 0..g.ngens() {
            assert_eq!(*tw.image(i), c.mul(rho.image(i)).mul(&ci));
        }
        for p in &g.places {
            assert_eq!(
                tw.evaluate(&p.sigma).unwrap().trace(),
                rho.evaluate(&p.sigma).unwrap().trace()
            );
        }
    }
}

#[test]
fn twist_valid_exactly_on_cocycles() {
    // every f on <s, t | s t s^-1 t^-7> at level 2, residue field F_5
    let (g, rho) = pair_group(7, [7, 0, 0, 1], 2);
    let ad0 = build_module(&rho.reduce_to(1).unwrap(), &g, 1, Twist::Adjoint).unwrap();
    let fox = fox_matrix(&g.relators, &ad0);
    let f = ad0.ring().clone();
    let mut valid = 0;
    for code in 0..5u128.pow(6) {
        let v: Vector = (0..6)
            .map(|i| f.from_int((code / 5u128.pow(i) % 5) as i64))
            .collect();
        let c = Cocycle::from_flat(&ad0, &v);
        let is_cocycle = linalg::is_zero_vec(&linalg::apply_rows(&f, &fox, &v));
        match twist(&g, &rho, &c) {
            Ok(t) => {
                assert!(is_cocycle);
                assert_eq!(t.reduce_to(1).unwrap(), rho.reduce_to(1).unwrap());
                valid += 1;
            }
            Err(LiftError::NotACocycle(_)) => assert!(!is_cocycle),
            Err(e) => panic!("{e}"),
        }
    }
    let z1 = cocycle_space(&g, &ad0).unwrap().z1.len();
    assert_eq!(valid, 5usize.pow(z1 as u32));
}

fn word_strategy() -> impl Strategy<Value = Word> {
    proptest::collection::vec((0..4usize, any::<bool>()), 0..6).prop_map(|v| {
        Word(
            v.into_iter()
                .map(|(gen, inv)| crate::galois_model::Letter { gen, inv })
                .collect(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn trace_effect_of_a_twist(vals in proptest::collection::vec(0i64..5, 12), w in word_strategy()) {
        let (g, rho, ad0) = free_level2();
        let f = Cocycle::from_flat(&ad0, &ints(ad0.ring(), &vals));
        let tw = twist(&g, &rho, &f).unwrap();
        let r = rho.ring();
        let rg = rho.evaluate(&w).unwrap();
        let fg = lift_cocycle_value(r, &f.eval(&ad0, &w));
        let expect = &rg.trace() + &fg.mul(&rg).trace().times_ell_pow(1);
        prop_assert_eq!(tw.evaluate(&w).unwrap().trace(), expect);
    }

    #[test]
    fn random_coboundaries_keep_traces(x in proptest::collection::vec(0i64..5, 3), w in word_strategy()) {
        let (g, rho, ad0) = free_level2();
        let c = Cocycle::coboundary(&ad0, &ints(ad0.ring(), &x));
        let tw = twist(&g, &rho, &c).unwrap();
        prop_assert_eq!(tw.evaluate(&w).unwrap().trace(), rho.evaluate(&w).unwrap().trace());
    }
}

#[test]
fn trace_functional_matches_plug_back() {
    let (g, rho, ad0) = free_level2();
    let v = g.place("p03").unwrap();
    let phi = trace_functional(&ad0, &rho, v).unwrap();
    let vals = ints(ad0.ring(), &[1, 2, 3, 4, 0, 1, 2, 2, 3, 1, 0, 4]);
    let f = Cocycle::from_flat(&ad0, &vals);
    let lin = vals
        .iter()
        .zip(&phi)
        .fold(ad0.ring().zero(), |acc, (a, b)| &acc + &(a * b));
    let before = rho.evaluate(&v.sigma).unwrap().trace();
    let after = twist(&g, &rho, &f).unwrap().evaluate(&v.sigma).unwrap().trace();
    let diff = (&after - &before).div_ell_pow(1).unwrap().residue();
    assert_eq!(diff, lin);
}

#[test]
fn nice_examples() {
    let (_, rho) = pair_group(7, [2, 0, 0, 1], 1);
    let (g, _) = pair_group(7, [2, 0, 0, 1], 1);
    assert!(is_nice(&g.places[0], &rho).unwrap());
    let (g11, rho11) = pair_group(11, [2, 0, 0, 1], 1);
    assert!(!is_nice(&g11.places[0], &rho11).unwrap());
    let (g4, rho4) = pair_group(4, [4, 0, 0, 1], 1);
    assert!(!is_nice(&g4.places[0], &rho4).unwrap());
    // ratio must match q: q = 7 = 2 but eigenvalues 4, 1
    let (g3, rho3) = pair_group(7, [4, 0, 0, 1], 1);
    assert!(!is_nice(&g3.places[0], &rho3).unwrap());
    // eigenvalues 3, 1 have ratio 1/3 = 2
    let (g3, rho3) = pair_group(7, [3, 0, 0, 1], 1);
    assert!(is_nice(&g3.places[0], &rho3).unwrap());
    // order of the eigenvalues does not matter
    let (gs, rhos) = pair_group(7, [1, 0, 0, 2], 1);
    assert!(is_nice(&gs.places[0], &rhos).unwrap());

    let (g7, rho7) = pair_group(7, [7, 0, 0, 1], 2);
    assert!(is_rho_m_nice(&g7.places[0], &rho7).unwrap());
    let (g2, rho2) = pair_group(7, [2, 0, 0, 1], 2);
    assert!(is_nice(&g2.places[0], &rho2).unwrap());
    assert!(!is_rho_m_nice(&g2.places[0], &rho2).unwrap());
}

#[test]
fn rho_m_nice_needs_unramified() {
    let (g, rho) = pair_group(7, [7, 0, 0, 1], 2);
    let r = rho.ring();
    let ramified = Deformation::new(
        r,
        vec![rho.image(0).clone(), Mat::from_ints(r, &[1, 5, 0, 1]).unwrap()],
    )
    .unwrap();
    assert!(validate_deformation(&ramified, &g).unwrap().passed);
    assert!(is_nice(&g.places[0], &ramified).unwrap());
    assert!(!is_rho_m_nice(&g.places[0], &ramified).unwrap());
}

#[test]
fn oracle_first_place_and_not_found() {
    let (g, rho) = surrogate_free();
    let pool: Vec<&Place> = g.places.iter().rev().collect();
    let none = OracleConstraints {
        rho_m_nice: false,
        module: None,
        classes: Vec::new(),
    };
    assert_eq!(oracle_find_places(&g, &pool, &rho, &none).unwrap().label, "p01");
    let nice = OracleConstraints {
        rho_m_nice: true,
        ..none
    };
    let first_nice = g
        .places_by_label()
        .into_iter()
        .find(|v| is_rho_m_nice(v, &rho).unwrap())
        .unwrap();
    assert_eq!(oracle_find_places(&g, &pool, &rho, &nice).unwrap(), first_nice);

    let dual = build_module(&rho, &g, 1, Twist::CartierDual).unwrap();
    let b = Cocycle::coboundary(&dual, &ints(dual.ring(), &[1, 1, 0]));
    let contradictory = OracleConstraints {
        rho_m_nice: false,
        module: Some(&dual),
        classes: vec![(b, true)],
    };
    assert_eq!(
        oracle_find_places(&g, &pool, &rho, &contradictory),
        Err(LiftError::NotFound)
    );
}

#[test]
fn oracle_matches_exhaustive_scan_on_tame() {
    let (g, rho) = surrogate_tame();
    let dual = build_module(&rho, &g, 1, Twist::CartierDual).unwrap();
    let space = cocycle_space(&g, &dual).unwrap();
    let pool: Vec<&Place> = g.places.iter().filter(|p| p.tags.contains(&"pool".into())).collect();
    let mut checked = 0;
    for rep in space.h1_basis.iter().take(6) {
        let f = Cocycle::from_flat(&dual, rep);
        let pattern: Vec<bool> = g
            .places_by_label()
            .iter()
            .map(|v| crate::cohomology::restrict_and_classify(&f, &dual, v) != cohomology::LocalClass::ZeroClass)
            .collect();
        let expect = g
            .places_by_label()
            .into_iter()
            .zip(&pattern)
            .find(|(v, nz)| **nz && pool.contains(v))
            .map(|(v, _)| v.label.clone());
        let c = OracleConstraints {
            rho_m_nice: false,
            module: Some(&dual),
            classes: vec![(f.clone(), true)],
        };
        match (oracle_find_places(&g, &pool, &rho, &c), expect) {
            (Ok(v), Some(l)) => {
                assert_eq!(v.label, l);
                checked += 1;
            }
            (Err(LiftError::NotFound), None) => {}
            (got, want) => panic!("{got:?} vs {want:?}"),
        }
    }
    assert!(checked > 0);
    let f = Cocycle::from_flat(&dual, &space.h1_basis[0]);
    let dependent = OracleConstraints {
        rho_m_nice: false,
        module: Some(&dual),
        classes: vec![(f.clone(), true), (f.scale(&dual.ring().from_int(2)), false)],
    };
    assert_eq!(
        oracle_find_places(&g, &pool, &rho, &dependent),
        Err(LiftError::DependentClasses)
    );
}

#[test]
fn trace_targets_examples() {
    let (g, rho, ad0) = free_level2();
    let p01 = g.place("p01").unwrap();
    let p05 = g.place("p05").unwrap();
    let tr = |v: &Place, r: &Deformation| r.evaluate(&v.sigma).unwrap().trace();

    let same = [(p01, tr(p01, &rho)), (p05, tr(p05, &rho))];
    let f = solve_trace_targets(&g, &rho, &ad0, &same, &[], &[]).unwrap();
    assert_eq!(f, Cocycle::zero(&ad0));

    let r = rho.ring();
    let target = &tr(p01, &rho) + &r.from_int(3).times_ell_pow(1);
    let f = solve_trace_targets(&g, &rho, &ad0, &[(p01, target.clone()), same[1].clone()], &[], &[])
        .unwrap();
    let tw = twist(&g, &rho, &f).unwrap();
    assert_eq!(tr(p01, &tw), target);
    assert_eq!(tr(p05, &tw), tr(p05, &rho));

    let off = &tr(p01, &rho) + &r.one();
    assert_eq!(
        solve_trace_targets(&g, &rho, &ad0, &[(p01, off)], &[], &[]),
        Err(LiftError::Inconsistent("p01".into()))
    );

    // p03 and p08 have conjugate Frobenius words, so their traces move together
    let p03 = g.place("p03").unwrap();
    let p08 = g.place("p08").unwrap();
    let bumped = &tr(p08, &rho) + &r.from_int(1).times_ell_pow(1);
    assert_eq!(
        solve_trace_targets(&g, &rho, &ad0, &[(p03, tr(p03, &rho)), (p08, bumped)], &[], &[]),
        Err(LiftError::Unreachable("p08".into()))
    );
}

#[test]
fn trace_target_solutions_differ_by_the_kernel() {
    let (g, rho, ad0) = free_level2();
    let p01 = g.place("p01").unwrap();
    let p02 = g.place("p02").unwrap();
    let r = rho.ring();
    let t1 = &rho.evaluate(&p01.sigma).unwrap().trace() + &r.from_int(2).times_ell_pow(1);
    let t2 = &rho.evaluate(&p02.sigma).unwrap().trace() + &r.from_int(4).times_ell_pow(1);
    let f = solve_trace_targets(&g, &rho, &ad0, &[(p01, t1.clone()), (p02, t2.clone())], &[], &[])
        .unwrap();
    let ker = constrained_cocycles(&g, &rho, &ad0, &[p01, p02], &[], &[]).unwrap();
    // 12 unknowns, two independent functionals
    assert_eq!(ker.len(), 10);
    for k in &ker {
        let other = f.add(&Cocycle::from_flat(&ad0, k));
        let tw = twist(&g, &rho, &other).unwrap();
        assert_eq!(tw.evaluate(&p01.sigma).unwrap().trace(), t1);
        assert_eq!(tw.evaluate(&p02.sigma).unwrap().trace(), t2);
    }
}

#[test]
fn locked_places_get_local_coboundaries() {
    let (g, rho) = pair_group(7, [7, 0, 0, 1], 2);
    let ad0 = build_module(&rho.reduce_to(1).unwrap(), &g, 1, Twist::Adjoint).unwrap();
    let v = &g.places[0];
    let target = &rho.evaluate(&v.sigma).unwrap().trace() + &rho.ring().from_int(1).times_ell_pow(1);
    // unlocked the target is reachable; locked the trace cannot move
    let f = solve_trace_targets(&g, &rho, &ad0, &[(v, target.clone())], &[], &["v"]).unwrap();
    assert_ne!(
        crate::cohomology::restrict_and_classify(&f, &ad0, v),
        cohomology::LocalClass::ZeroClass
    );
    assert_eq!(
        solve_trace_targets(&g, &rho, &ad0, &[(v, target)], &[v], &["v"]),
        Err(LiftError::Unreachable("v".into()))
    );
}

#[test]
fn auxiliary_empty_when_maps_are_isomorphisms() {
    let (g, rho) = cyclic_group([2, 0, 0, 2], 4, &[("w", "x", 9), ("n1", "x", 7)]);
    let pool: Vec<&Place> = vec![g.place("n1").unwrap()];
    let aux = select_auxiliary(&g, &rho, &["w"], &[], &pool).unwrap();
    assert!(aux.q.is_empty());
    assert!(aux.ranks.iter().all(|m| m.is_iso()));
}

#[test]
fn auxiliary_reference_configuration() {
    let places = [("m0", "x^2", 4), ("n1", "x", 7), ("n2", "x^3", 3), ("w", "x", 12)];
    let (g, rho) = cyclic_group([2, 0, 0, 1], 2, &places);
    let pool: Vec<&Place> = ["n2", "m0", "n1"].iter().map(|l| g.place(l).unwrap()).collect();
    let before = localization_ranks(&g, &rho, &["w"], &[], &[]).unwrap();
    assert!(!before[0].is_iso());
    let aux = select_auxiliary(&g, &rho, &["w"], &[], &pool).unwrap();
    // m0 has eigenvalue ratio 4 = -1 and is skipped
    assert_eq!(aux.q, vec!["n1".to_string()]);
    assert_eq!(aux.ranks, localization_ranks(&g, &rho, &["w"], &[], &["n1"]).unwrap());
    assert!(aux.ranks.iter().all(|m| m.is_iso()));

    let no_nice: Vec<&Place> = vec![g.place("m0").unwrap()];
    assert_eq!(
        select_auxiliary(&g, &rho, &["w"], &[], &no_nice),
        Err(LiftError::PoolExhausted)
    );
}

#[test]
fn auxiliary_rejects_nontrivial_sha() {
    let (g, rho) = surrogate_tame();
    let pool: Vec<&Place> = g.places.iter().collect();
    assert!(matches!(
        select_auxiliary(&g, &rho, &["v3"], &[], &pool),
        Err(LiftError::ShaNotTrivial { .. })
    ));
}

#[test]
fn free_group_has_no_obstructions() {
    let (g, rho, ad0) = free_level2();
    let pool: Vec<&Place> = g.places.iter().collect();
    let res = resolve_obstructions(&g, &rho, &[], &["p01"], &[], &pool).unwrap();
    assert_eq!(res.h, Cocycle::zero(&ad0));
    assert!(res.t.is_empty());
}

/// Level-2 tame lift whose `s_1` has eigenvalue ratio 2 instead of 7 while
/// `t_1` is ramified mod 25.
fn seeded_tame() -> (ModelGroup, Deformation) {
    let (g, _) = surrogate_tame();
    let r = WittRing::new(5, 1, 2).unwrap();
    let unip = Mat::from_ints(&r, &[1, 1, 0, 1]).unwrap();
    let id = Mat::identity(&r, 2);
    let s = [[17, 0, 0, 21], [13, 0, 0, 1], [17, 0, 0, 1], [11, 1, 0, 1], [23, 0, 0, 1], [19, 0, 0, 1]];
    let mut imgs = vec![unip.clone(), Mat::from_ints(&r, &[0, 1, -1, 0]).unwrap()];
    for (k, e) in s.iter().enumerate() {
        imgs.push(Mat::from_ints(&r, e).unwrap());
        imgs.push(match k {
            0 => Mat::from_ints(&r, &[1, 5, 0, 1]).unwrap(),
            2 => unip.clone(),
            _ => id.clone(),
        });
    }
    let rho = Deformation::new(&r, imgs).unwrap();
    assert!(validate_deformation(&rho, &g).unwrap().passed);
    (g, rho)
}

#[test]
fn seeded_obstruction_is_resolved() {
    let (g, rho) = seeded_tame();
    assert!(!linalg::is_zero_vec(&obstruction(&g, &rho).unwrap()));
    let pool: Vec<&Place> = g.places.iter().filter(|p| p.tags.contains(&"pool".into())).collect();
    let res = resolve_obstructions(&g, &rho, &["v3"], &["v2"], &["v1"], &pool).unwrap();
    let fixed = twist(&g, &rho, &res.h).unwrap();
    assert!(linalg::is_zero_vec(&obstruction(&g, &fixed).unwrap()));
    let v2 = g.place("v2").unwrap();
    assert_eq!(
        fixed.evaluate(&v2.sigma).unwrap().trace(),
        rho.evaluate(&v2.sigma).unwrap().trace()
    );
    let ad0 = build_module(&rho.reduce_to(1).unwrap(), &g, 1, Twist::Adjoint).unwrap();
    let v3 = g.place("v3").unwrap();
    assert_eq!(
        crate::cohomology::restrict_and_classify(&res.h, &ad0, v3),
        cohomology::LocalClass::ZeroClass
    );
    // the lift now exists
    let next = auxiliary::lift_once(&g, &fixed, &ad0).unwrap().unwrap().0;
    assert_eq!(next.reduce_to(2).unwrap(), fixed);
    assert!(validate_deformation(&next, &g).unwrap().passed);
}

#[test]
fn unresolvable_obstruction_reports_support() {
    let (g, rho) = seeded_tame();
    // locking v1 forbids the twist at s_1; with no pool there is nothing to add
    let res = resolve_obstructions(&g, &rho, &["v1", "v3"], &[], &[], &[]);
    assert_eq!(res, Err(LiftError::SupportConditionUnavailable));
}

fn free_tower(levels: u32, escape: bool) -> (Tower, Certificate) {
    build_tower(&TowerPlan::free4(levels, escape)).unwrap()
}

#[test]
fn free_tower_to_level_four() {
    let (tower, cert) = free_tower(4, true);
    let g = &tower.group;
    assert_eq!(tower.levels.len(), 4);
    for (i, rho) in tower.levels.iter().enumerate() {
        let m = i as u32 + 1;
        assert_eq!((rho.level(), rho.degree()), (m, degree_at(m)));
        assert!(validate_deformation(rho, g).unwrap().passed);
        if m > 1 {
            let prev = tower.levels[i - 1].embed(rho.degree()).unwrap();
            assert_eq!(rho.reduce_to(m - 1).unwrap(), prev);
            let r = g.place(&tower.plan.r_places[i - 1]).unwrap();
            let tr = rho.evaluate(&r.sigma).unwrap().trace();
            assert!(!tr.in_subring_gcd(degree_at(m - 1)), "r_{m}");
        }
        for t in &tower.logs[i].targets {
            let v = g.place(&t.place).unwrap();
            assert_eq!(rho.evaluate(&v.sigma).unwrap().trace(), t.trace);
        }
    }
    cert.check().unwrap();
    let covered: Vec<usize> = cert.witnesses.iter().map(|w| w.d).collect();
    assert_eq!(covered, (1..=7).collect::<Vec<_>>());
    for w in &cert.witnesses {
        let expect_level = match w.d {
            d if d % 2 == 1 => 2,
            d if d % 4 == 2 => 3,
            _ => 4,
        };
        assert_eq!(w.level, expect_level, "d = {}", w.d);
    }
    let top: Vec<WittElem> = tower.logs[3].traces.iter().map(|t| t.trace.clone()).collect();
    assert_eq!(field_of_definition(&top, 7), None);
}

#[test]
fn frobenius_fixed_plan_is_a_negative_control() {
    let (tower, cert) = free_tower(4, false);
    assert!(cert.witnesses.is_empty());
    assert_eq!(cert.minimal_field, Some(1));
    let top: Vec<WittElem> = tower.logs[3].traces.iter().map(|t| t.trace.clone()).collect();
    assert_eq!(field_of_definition(&top, 8), Some(1));
}

#[test]
fn level_one_tower_is_the_residual() {
    let (tower, cert) = free_tower(1, true);
    let (_, rho) = surrogate_free();
    assert_eq!(tower.levels, vec![rho]);
    assert!(cert.witnesses.is_empty());
}

#[test]
fn fixed_override_is_rejected_before_stepping() {
    let mut plan = TowerPlan::free4(3, true);
    let r = WittRing::new(5, 2, 2).unwrap();
    plan.overrides.push(TraceTarget {
        level: 2,
        place: "p01".into(),
        trace: r.from_int(3),
    });
    assert!(matches!(build_tower(&plan), Err(LiftError::PlanInvalid(_))));
}

#[test]
fn escaping_override_is_used() {
    let mut plan = TowerPlan::free4(2, true);
    let r = WittRing::new(5, 2, 2).unwrap();
    let t = &r.from_int(13) + &r.gen().times_ell_pow(1).scale_int(3);
    plan.overrides.push(TraceTarget {
        level: 2,
        place: "p01".into(),
        trace: t.clone(),
    });
    let (tower, _) = build_tower(&plan).unwrap();
    let v = tower.group.place("p01").unwrap();
    assert_eq!(tower.levels[1].evaluate(&v.sigma).unwrap().trace(), t);
}

#[test]
fn field_of_definition_examples() {
    let r = WittRing::new(5, 4, 3).unwrap();
    assert_eq!(field_of_definition(&[r.from_int(7), r.from_int(-2)], 8), Some(1));
    let f25 = WittRing::field(5, 2).unwrap();
    let a = teichmuller(&f25.gen(), 3).unwrap();
    let x = embed(&a, 4).unwrap();
    assert_eq!(field_of_definition(&[x.clone(), r.from_int(3)], 8), Some(2));
    assert_eq!(field_of_definition(&[x], 1), None);
    assert_eq!(field_of_definition(&[], 8), Some(1));
}

#[test]
fn replay_and_verify_round_trip() {
    let (tower, cert) = free_tower(4, true);
    let file = tower.to_file(&cert);
    let json = serde_json::to_string(&file).unwrap();
    let back = TowerFile::from_json(&json).unwrap();
    assert_eq!(replay_log(&back).unwrap(), tower.levels);
    assert!(verify_tower(&back).unwrap().passed);
    // identical plans give identical files
    let (t2, c2) = free_tower(4, true);
    assert_eq!(serde_json::to_string(&t2.to_file(&c2)).unwrap(), json);
}

#[test]
fn verify_names_a_corrupted_trace() {
    let (tower, cert) = free_tower(3, true);
    let mut file = tower.to_file(&cert);
    let t = &mut file.levels[2].targets[1];
    t.trace = &t.trace + &t.trace.ring().from_int(25);
    let rep = verify_tower(&file).unwrap();
    assert!(!rep.passed);
    assert!(rep.failures.iter().any(|f| f.contains("trace target at p01")), "{:?}", rep.failures);

    let mut file = tower.to_file(&cert);
    file.levels[1].images[0] = file.levels[1].images[0].add(&Mat::identity(file.levels[1].images[0].ring(), 2).times_ell_pow(1));
    let rep = verify_tower(&file).unwrap();
    assert!(!rep.passed);
}
