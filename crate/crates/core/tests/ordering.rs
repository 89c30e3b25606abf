mod common;

use common::{assign, monotone_oracle};
use twincf::data::Dataset;
use twincf::models::{
    eq2, eq2_model_a, eq2_model_b, random_treatment_outcome, Shape, TreatmentOutcomeConfig,
};
use twincf::ordering::{
    check_cf_ordering, check_cf_ordering_detailed, check_interventional_premise, check_monotone,
    check_stability, check_stability_scoped, infer_ordering, write_violations, OrderingSource,
    OrderingSpec, PremiseForm, StabilityScope, Trend, ViolationKind, Witness,
};
use twincf::scm::{tuples, Scm, ScmSpec};
use twincf::Error;

fn xy(n: u32, m: u32) -> OrderingSpec {
    OrderingSpec::identity("X", "Y", n, m)
}

#[test]
fn premise_on_eq2() {
    let scm = eq2_model_a();
    let p1 = scm.interventional(&["Y"], &assign(&[("X", 1)]), &Default::default()).unwrap();
    let p0 = scm.interventional(&["Y"], &assign(&[("X", 0)]), &Default::default()).unwrap();
    // Y_1 = 1 on u in {0, 2}; Y_0 = 1 on u in {2, 3}
    assert!((p1.prob(&[1]) - 2.0 / 3.0).abs() < 1e-12);
    assert!((p0.prob(&[1]) - 1.0 / 3.0).abs() < 1e-12);
    for form in [PremiseForm::Pointwise, PremiseForm::Dominance] {
        assert!(check_interventional_premise(&scm, &xy(2, 2), form).unwrap().is_empty());
        let rev = check_interventional_premise(&scm, &xy(2, 2).reversed_treatments(), form).unwrap();
        assert!(!rev.is_empty());
        assert!(rev.iter().all(|r| r.kind == ViolationKind::InterventionalPremise && r.magnitude > 1e-12));
    }
}

#[test]
fn premise_single_outcome_is_vacuous() {
    let scm = Scm::builder()
        .latent("U", vec![0.5, 0.5])
        .observed("X", 2, &["U"], vec![0, 1])
        .observed("Y", 1, &["X"], vec![0, 0])
        .build()
        .unwrap();
    let ord = xy(2, 1);
    assert!(check_interventional_premise(&scm, &ord, PremiseForm::Pointwise).unwrap().is_empty());
    assert!(check_monotone(&scm, &ord).unwrap().is_empty());
    assert!(check_cf_ordering(&scm, &ord).unwrap().is_empty());
}

#[test]
fn pointwise_premise_is_stricter_for_three_outcomes() {
    // Y_1 moves all mass to the top, emptying the middle category
    let scm = Scm::builder()
        .latent("U_X", vec![0.5, 0.5])
        .latent("U_Y", vec![0.5, 0.5])
        .observed("X", 2, &["U_X"], vec![0, 1])
        .observed("Y", 3, &["X", "U_Y"], vec![0, 1, 2, 2])
        .build()
        .unwrap();
    let ord = xy(2, 3);
    assert!(check_interventional_premise(&scm, &ord, PremiseForm::Dominance).unwrap().is_empty());
    assert!(!check_interventional_premise(&scm, &ord, PremiseForm::Pointwise).unwrap().is_empty());
}

#[test]
fn monotone_eq2() {
    assert!(check_monotone(&eq2_model_b(), &xy(2, 2)).unwrap().is_empty());
    let v = check_monotone(&eq2_model_a(), &xy(2, 2)).unwrap();
    // one report per U_X value, each on the U_Y = 3 branch
    assert_eq!(v.len(), 2);
    for r in &v {
        assert_eq!(r.kind, ViolationKind::Monotonicity);
        match &r.witness {
            Witness::Latent { u, i, j } => {
                assert_eq!(u["U_Y"], 3);
                assert_eq!((*i, *j), (1, 0));
            }
            w => panic!("unexpected witness {w:?}"),
        }
        assert!((r.magnitude - 0.5 / 6.0).abs() < 1e-12);
    }
}

#[test]
fn constant_mechanism_is_monotone() {
    let scm = eq2([0.0, 0.3, 0.7, 0.0], 0.4);
    assert!(check_monotone(&scm, &xy(2, 2)).unwrap().is_empty());
    assert!(check_cf_ordering(&scm, &xy(2, 2)).unwrap().is_empty());
    assert!(check_stability(&scm, &xy(2, 2)).unwrap().is_empty());
}

#[test]
fn cf_ordering_eq2() {
    assert!(check_cf_ordering(&eq2_model_b(), &xy(2, 2)).unwrap().is_empty());
    let v = check_cf_ordering(&eq2_model_a(), &xy(2, 2)).unwrap();
    assert_eq!(v.len(), 1);
    // P(Y_0 = 1 | Y_1 = 0) = q3 / (q1 + q3)
    assert_eq!(v[0].witness, Witness::Indices { i: 1, j: 0, h: 0, l: 1 });
    assert!((v[0].magnitude - 0.5).abs() < 1e-12);
}

#[test]
fn cf_ordering_skips_impossible_conditioning() {
    let scm = eq2([0.0, 0.0, 1.0, 0.0], 0.5);
    let c = check_cf_ordering_detailed(&scm, &xy(2, 2)).unwrap();
    assert!(c.violations.is_empty());
    assert_eq!(c.skipped, vec![(1, 0, 0)]);
}

#[test]
fn stability_eq2() {
    let a = check_stability(&eq2_model_a(), &xy(2, 2)).unwrap();
    assert!(!a.is_empty());
    assert!(a.iter().all(|r| r.kind == ViolationKind::Stability));
    assert!(check_stability(&eq2_model_b(), &xy(2, 2)).unwrap().is_empty());
    // the unordered reading flags the monotone model: x=1, x'=0, y=0, y'=1
    // has equal ratios (1/2 each) while P(Y_1 = 1 | Y_0 = 0) = 1/2
    let all = check_stability_scoped(&eq2_model_b(), &xy(2, 2), StabilityScope::All).unwrap();
    assert!(all
        .iter()
        .any(|r| r.witness == Witness::Indices { i: 1, j: 0, h: 1, l: 0 } && (r.magnitude - 0.5).abs() < 1e-12));
}

#[test]
fn orderings_are_validated() {
    assert!(matches!(
        OrderingSpec::new("X", "Y", vec![0, 0], vec![0, 1]),
        Err(Error::InvalidOrdering(_))
    ));
    assert!(OrderingSpec::from_json(r#"{"treatment_order":[1,0],"outcome_order":[0,1]}"#).is_ok());
    let bad = xy(3, 2);
    assert!(matches!(check_monotone(&eq2_model_a(), &bad), Err(Error::InvalidOrdering(_))));
}

#[test]
fn violation_json_lines() {
    let v = check_cf_ordering(&eq2_model_a(), &xy(2, 2)).unwrap();
    let mut buf = Vec::new();
    write_violations(&v, &mut buf).unwrap();
    let line: serde_json::Value = serde_json::from_slice(buf.split(|&b| b == b'\n').next().unwrap()).unwrap();
    assert_eq!(line["kind"], "ordering");
    assert_eq!(line["witness"]["l"], 1);
}

fn random_model(seed: u64) -> Scm {
    let n = 2 + (seed % 3) as u32;
    let m = 2 + ((seed / 3) % 3) as u32;
    let shape = match seed % 4 {
        0 => Shape::Free,
        1 => Shape::Perturbed,
        _ => Shape::Monotone,
    };
    random_treatment_outcome(
        seed,
        TreatmentOutcomeConfig {
            treatments: n,
            outcomes: m,
            latent_card: 2 + (seed % 5) as u32,
            confounder_card: if seed % 2 == 0 { 2 } else { 1 },
            shape,
        },
    )
}

#[test]
fn ordering_theorems_on_random_models() {
    let mut with_premise = 0;
    for seed in 0..60 {
        let scm = random_model(seed);
        let (n, m) = (scm.cardinality(scm.id("X").unwrap()), scm.cardinality(scm.id("Y").unwrap()));
        let ord = xy(n, m);
        let monotone = check_monotone(&scm, &ord).unwrap().is_empty();
        assert_eq!(monotone, monotone_oracle(&scm, "X", "Y"), "seed {seed}");
        let cf = check_cf_ordering(&scm, &ord).unwrap();
        if monotone {
            assert!(cf.is_empty(), "seed {seed}: {cf:?}");
        }
        if !check_interventional_premise(&scm, &ord, PremiseForm::Dominance).unwrap().is_empty() {
            continue;
        }
        with_premise += 1;
        assert_eq!(monotone, cf.is_empty(), "seed {seed}");
        if cf.is_empty() {
            assert!(check_stability(&scm, &ord).unwrap().is_empty(), "seed {seed}");
        }
    }
    assert!(with_premise >= 20, "{with_premise}");
}

fn counts_dataset(groups: &[(u32, &[(u32, usize)])]) -> Dataset {
    let mut rows = Vec::new();
    for &(x, ys) in groups {
        for &(y, n) in ys {
            rows.extend(std::iter::repeat(vec![x as f64, y as f64]).take(n));
        }
    }
    Dataset::from_rows(vec!["X".into(), "Y".into()], &rows).unwrap()
}

#[test]
fn infer_increasing_trend() {
    // means 0.5, 0.8059, 1.3914
    let d = counts_dataset(&[
        (0, &[(0, 5000), (1, 5000)]),
        (1, &[(0, 1941), (1, 8059)]),
        (2, &[(1, 6086), (2, 3914)]),
    ]);
    let src = OrderingSource::Data { data: &d, covariates: vec![] };
    let r = infer_ordering(&src, "X", "Y", None).unwrap();
    assert_eq!(r.ordering.treatment_order, vec![0, 1, 2]);
    assert!((r.ate[0][1] - 0.3059).abs() < 1e-9);
    assert!((r.ate[0][2] - 0.8914).abs() < 1e-9);
    assert!((r.ate[1][0] + 0.3059).abs() < 1e-9);
    assert_eq!(r.trend, Trend::Increasing);
    assert!(!r.non_monotone);
    let mut buf = Vec::new();
    r.write_ate_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("control,0,1,2\n0,0.000000,0.305900,0.891400\n"), "{text}");
}

#[test]
fn infer_ties_and_outliers() {
    let d = counts_dataset(&[(0, &[(0, 5), (1, 5)]), (1, &[(0, 5), (1, 5)]), (2, &[(0, 5), (1, 5)])]);
    let src = OrderingSource::Data { data: &d, covariates: vec![] };
    let r = infer_ordering(&src, "X", "Y", None).unwrap();
    assert_eq!(r.ordering.treatment_order, vec![0, 1, 2]);
    assert_eq!(r.trend, Trend::Flat);

    let d = counts_dataset(&[(0, &[(0, 5), (1, 5)]), (1, &[(0, 7), (1, 3)]), (2, &[(0, 1), (1, 9)])]);
    let src = OrderingSource::Data { data: &d, covariates: vec![] };
    let r = infer_ordering(&src, "X", "Y", None).unwrap();
    assert_eq!(r.ordering.treatment_order, vec![1, 0, 2]);
    assert!(r.non_monotone);
    assert_eq!(r.trend, Trend::NonMonotone);

    let domain = OrderingSpec::identity("X", "Y", 3, 2);
    let r = infer_ordering(&src, "X", "Y", Some(&domain)).unwrap();
    assert!(r.from_domain_knowledge);
    assert_eq!(r.ordering.treatment_order, vec![0, 1, 2]);
}

#[test]
fn infer_from_scm_matches_interventionals() {
    let scm = eq2_model_a();
    let r = infer_ordering(&OrderingSource::Scm(&scm), "X", "Y", None).unwrap();
    assert_eq!(r.ordering.treatment_order, vec![0, 1]);
    assert!((r.ate[0][1] - 1.0 / 3.0).abs() < 1e-12);
    // q3 > 0 does not break the interventional trend
    assert!(!r.non_monotone);
}

#[test]
fn adjustment_recovers_interventionals() {
    // first seed whose (Z, X) strata are all populated
    let (scm, d) = (0..50)
        .map(|seed| {
            let scm = random_treatment_outcome(
                seed,
                TreatmentOutcomeConfig { treatments: 3, outcomes: 3, latent_card: 4, confounder_card: 3, shape: Shape::Free },
            );
            let s = scm.sample_rows(200_000, 11);
            let cols = (0..s.names.len()).map(|c| s.rows.iter().map(|r| r[c] as f64).collect()).collect();
            (scm, Dataset::new(s.names.clone(), cols).unwrap())
        })
        .find(|(_, d)| {
            let (z, x) = (d.category("Z").unwrap(), d.category("X").unwrap());
            let mut seen = [[0usize; 3]; 3];
            z.iter().zip(&x).for_each(|(&a, &b)| seen[a as usize][b as usize] += 1);
            seen.iter().flatten().all(|&c| c >= 500)
        })
        .expect("a model with positivity");
    let adj = infer_ordering(&OrderingSource::Data { data: &d, covariates: vec!["Z".into()] }, "X", "Y", None).unwrap();
    let exact = infer_ordering(&OrderingSource::Scm(&scm), "X", "Y", None).unwrap();
    for (a, e) in adj.dist.iter().flatten().zip(exact.dist.iter().flatten()) {
        assert!((a - e).abs() < 0.015, "{a} vs {e}");
    }
}

/// Relabel treatment codes of `scm` through `perm` (old code -> new code).
fn relabel(scm: &Scm, perm: &[u32]) -> Scm {
    let mut inv = vec![0u32; perm.len()];
    for (old, &new) in perm.iter().enumerate() {
        inv[new as usize] = old as u32;
    }
    let mut spec: ScmSpec = scm.to_spec();
    for m in spec.mechanisms.iter_mut() {
        if m.child == "X" {
            m.table.iter_mut().for_each(|v| *v = perm[*v as usize]);
        } else if let Some(px) = m.parents.iter().position(|p| p == "X") {
            let cards: Vec<u32> = m.parents.iter().map(|p| scm.cardinality(scm.id(p).unwrap())).collect();
            let index = |t: &[u32]| t.iter().zip(&cards).fold(0usize, |acc, (&v, &c)| acc * c as usize + v as usize);
            let old = m.table.clone();
            for t in tuples(&cards) {
                let mut src = t.clone();
                src[px] = inv[t[px] as usize];
                m.table[index(&t)] = old[index(&src)];
            }
        }
    }
    Scm::from_spec(&spec).unwrap()
}

#[test]
fn infer_tracks_relabeling() {
    let perm = [2u32, 0, 1];
    for seed in 0..10 {
        let scm = random_treatment_outcome(
            seed,
            TreatmentOutcomeConfig { treatments: 3, outcomes: 3, latent_card: 3, confounder_card: 2, shape: Shape::Free },
        );
        let a = infer_ordering(&OrderingSource::Scm(&scm), "X", "Y", None).unwrap();
        let mut sorted = a.means.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if sorted.windows(2).any(|w| (w[1] - w[0]).abs() < 1e-9) {
            continue;
        }
        let b = infer_ordering(&OrderingSource::Scm(&relabel(&scm, &perm)), "X", "Y", None).unwrap();
        let mapped: Vec<u32> = a.ordering.treatment_order.iter().map(|&c| perm[c as usize]).collect();
        assert_eq!(b.ordering.treatment_order, mapped, "seed {seed}");
    }
}
