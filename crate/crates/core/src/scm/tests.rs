use super::*;
use crate::models::{eq2, eq2_model_a, eq2_model_b};

fn a(pairs: &[(&str, u32)]) -> Assignment {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Brute force over (U_X, U_Y) written out by hand, independent of the
/// enumeration engine.
fn eq2_joint_oracle(q: [f64; 4], px1: f64) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for ux in 0..2u32 {
        let px = if ux == 1 { px1 } else { 1.0 - px1 };
        for (uy, &qu) in q.iter().enumerate() {
            let x = ux;
            let y = match uy {
                0 => x,
                1 => 0,
                2 => 1,
                _ => 1 - x,
            };
            out[x as usize][y as usize] += px * qu;
        }
    }
    out
}

#[test]
fn validates_eq2_model() {
    let scm = eq2_model_a();
    assert_eq!(scm.observed().len(), 2);
    assert_eq!(scm.latents().len(), 2);
    let topo: Vec<&str> = scm.topological_order().iter().map(|&v| scm.name(v)).collect();
    assert_eq!(topo, vec!["X", "Y"]);
}

#[test]
fn validates_point_mass_single_variable() {
    let scm = Scm::builder()
        .latent("U", vec![1.0])
        .observed("A", 3, &["U"], vec![2])
        .build()
        .unwrap();
    let j = scm.joint().unwrap();
    assert_eq!(j.support, vec![vec![2]]);
    assert_eq!(j.probs, vec![1.0]);
}

#[test]
fn rejects_cycle_with_back_edge() {
    let mut spec = eq2_model_a().to_spec();
    let x = spec.mechanisms.iter_mut().find(|m| m.child == "X").unwrap();
    x.parents = vec!["Y".into(), "U_X".into()];
    x.table = vec![0, 1, 0, 1];
    match Scm::from_spec(&spec) {
        Err(Error::CycleDetected { from, to }) => {
            let edge = (from.as_str(), to.as_str());
            assert!(edge == ("X", "Y") || edge == ("Y", "X"), "{edge:?}");
        }
        other => panic!("expected cycle, got {other:?}"),
    }
}

#[test]
fn rejects_partial_mechanism_naming_tuple() {
    let mut spec = eq2_model_a().to_spec();
    let y = spec.mechanisms.iter_mut().find(|m| m.child == "Y").unwrap();
    y.table.truncate(5);
    match Scm::from_spec(&spec) {
        Err(Error::PartialMechanism { child, detail }) => {
            assert_eq!(child, "Y");
            assert!(detail.contains("X=1, U_Y=1"), "{detail}");
        }
        other => panic!("expected partial mechanism, got {other:?}"),
    }
}

#[test]
fn rejects_unnormalised_latent() {
    let mut spec = eq2_model_a().to_spec();
    spec.latents[1].probs = vec![0.5, 0.2, 0.2, 0.2];
    match Scm::from_spec(&spec) {
        Err(Error::BadDistribution { variable, sum }) => {
            assert_eq!(variable, "U_Y");
            assert!((sum - 1.1).abs() < 1e-12);
        }
        other => panic!("expected bad distribution, got {other:?}"),
    }
}

#[test]
fn rejects_shared_latent_outside_twin() {
    let r = Scm::builder()
        .latent("U", vec![0.5, 0.5])
        .observed("A", 2, &["U"], vec![0, 1])
        .observed("B", 2, &["U"], vec![1, 0])
        .build();
    assert!(matches!(r, Err(Error::InvalidSpec(_))));
}

#[test]
fn rejects_out_of_range_table_entry() {
    let r = Scm::builder()
        .latent("U", vec![0.5, 0.5])
        .observed("A", 2, &["U"], vec![0, 2])
        .build();
    assert!(matches!(r, Err(Error::ValueOutOfRange { .. })));
}

#[test]
fn json_round_trip_preserves_model() {
    let scm = eq2_model_a();
    let back = Scm::from_json(&scm.to_json()).unwrap();
    assert_eq!(back.to_spec(), scm.to_spec());
}

#[test]
fn sample_matches_conditional_within_three_sigma() {
    let scm = eq2_model_a();
    let s = scm.sample_rows(1_000_000, 11);
    let xi = s.names.iter().position(|n| n == "X").unwrap();
    let yi = s.names.iter().position(|n| n == "Y").unwrap();
    let x0: Vec<&Vec<u32>> = s.rows.iter().filter(|r| r[xi] == 0).collect();
    let p = x0.iter().filter(|r| r[yi] == 0).count() as f64 / x0.len() as f64;
    let exact = 0.5 + 1.0 / 6.0;
    let sigma = (exact * (1.0 - exact) / x0.len() as f64).sqrt();
    assert!((p - exact).abs() < 3.0 * sigma, "p={p} sigma={sigma}");
}

#[test]
fn sample_point_mass_is_constant() {
    let scm = Scm::builder()
        .latent("U_A", vec![0.0, 1.0])
        .latent("U_B", vec![1.0])
        .observed("A", 2, &["U_A"], vec![0, 1])
        .observed_fn("B", 3, &["A", "U_B"], |v| v[0] + 1)
        .build()
        .unwrap();
    let s = scm.sample_rows(500, 3);
    assert!(s.rows.iter().all(|r| r == &vec![1, 2]));
}

#[test]
fn sample_is_deterministic_given_seed() {
    let scm = eq2_model_a();
    assert_eq!(scm.sample(200, 5), scm.sample(200, 5));
    assert_ne!(scm.sample(200, 5), scm.sample(200, 6));
}

#[test]
fn do_replaces_only_intervened_mechanism() {
    let scm = eq2_model_a();
    let sub = scm.intervene(&a(&[("X", 0)])).unwrap();
    let x = sub.id("X").unwrap();
    let y = sub.id("Y").unwrap();
    assert!(sub.mechanism(x).unwrap().is_constant());
    assert_eq!(sub.mechanism(x).unwrap().table(), &[0]);
    assert_eq!(sub.mechanism(y), scm.mechanism(y));
}

#[test]
fn empty_do_is_identity() {
    let scm = eq2_model_a();
    let sub = scm.intervene(&Assignment::new()).unwrap();
    assert_eq!(sub.to_spec(), scm.to_spec());
}

#[test]
fn do_on_target_gives_point_mass() {
    let scm = eq2_model_a();
    let m = scm.intervene(&a(&[("Y", 1)])).unwrap().joint().unwrap().marginal(&["Y"]).unwrap();
    assert_eq!(m.support, vec![vec![1]]);
    assert!((m.probs[0] - 1.0).abs() < 1e-15);
}

#[test]
fn do_rejects_latent_and_unknown() {
    let scm = eq2_model_a();
    assert!(matches!(scm.intervene(&a(&[("U_Y", 0)])), Err(Error::LatentIntervention(_))));
    assert!(matches!(scm.intervene(&a(&[("W", 0)])), Err(Error::UnknownVariable(_))));
}

#[test]
fn joint_matches_brute_force() {
    let q = [0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
    let oracle = eq2_joint_oracle(q, 0.5);
    let j = eq2(q, 0.5).joint().unwrap();
    for x in 0..2u32 {
        for y in 0..2u32 {
            assert!((j.prob(&[x, y]) - oracle[x as usize][y as usize]).abs() < 1e-15);
        }
    }
    assert!((j.prob(&[0, 0]) - 1.0 / 3.0).abs() < 1e-15);
    assert!((j.total() - 1.0).abs() < 1e-9);
}

#[test]
fn joint_of_deterministic_model_is_single_entry() {
    let scm = Scm::builder()
        .latent("U", vec![1.0])
        .observed("A", 2, &["U"], vec![1])
        .observed_fn("B", 2, &["A"], |v| 1 - v[0])
        .build()
        .unwrap();
    let j = scm.joint().unwrap();
    assert_eq!(j.len(), 1);
    assert_eq!(j.support[0], vec![1, 0]);
}

#[test]
fn joint_respects_enumeration_cap() {
    let scm = eq2_model_a().with_enum_cap(7);
    match scm.joint() {
        Err(Error::EnumerationTooLarge { support, cap }) => {
            assert_eq!(support, 8);
            assert_eq!(cap, 7);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn conditional_matches_closed_forms() {
    let ya = eq2_model_a().conditional(&["Y"], &a(&[("X", 0)])).unwrap();
    assert!((ya.prob(&[0]) - 2.0 / 3.0).abs() < 1e-12);
    let yb = eq2_model_b().conditional(&["Y"], &a(&[("X", 1)])).unwrap();
    assert!((yb.prob(&[0]) - 1.0 / 3.0).abs() < 1e-12);
}

#[test]
fn conditional_on_everything_is_point_mass() {
    let t = eq2_model_a()
        .conditional(&["X", "Y"], &a(&[("X", 1), ("Y", 0)]))
        .unwrap();
    assert_eq!(t.support, vec![vec![1, 0]]);
    assert!((t.probs[0] - 1.0).abs() < 1e-15);
}

#[test]
fn conditional_reports_zero_evidence() {
    let scm = eq2([1.0, 0.0, 0.0, 0.0], 0.5);
    assert!(matches!(
        scm.conditional(&["X"], &a(&[("X", 0), ("Y", 1)])),
        Err(Error::ZeroEvidence { .. })
    ));
}

#[test]
fn empty_evidence_conditional_is_joint_marginal() {
    let scm = crate::models::random_dag(4, 4, 2);
    let names: Vec<&str> = vec!["V1", "V3"];
    let c = scm.conditional(&names, &Assignment::new()).unwrap();
    let m = scm.joint().unwrap().marginal(&names).unwrap();
    assert_eq!(c.support, m.support);
    for (p, q) in c.probs.iter().zip(&m.probs) {
        assert!((p - q).abs() < 1e-12);
    }
}

#[test]
fn interventional_equals_conditional_without_confounding() {
    for scm in [eq2_model_a(), eq2_model_b()] {
        for x in 0..2 {
            let i = scm.interventional(&["Y"], &a(&[("X", x)]), &Assignment::new()).unwrap();
            let c = scm.conditional(&["Y"], &a(&[("X", x)])).unwrap();
            for y in 0..2 {
                assert!((i.prob(&[y]) - c.prob(&[y])).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn interventional_on_target_is_point_mass() {
    let t = eq2_model_a()
        .interventional(&["Y"], &a(&[("Y", 0)]), &Assignment::new())
        .unwrap();
    assert_eq!(t.support, vec![vec![0]]);
}

#[test]
fn sampling_converges_to_joint_in_total_variation() {
    for seed in 0..3 {
        let scm = crate::models::random_dag(seed, 4, 2);
        let n = 1_000_000;
        let j = scm.joint().unwrap();
        let s = scm.sample_rows(n, seed);
        let mut counts = std::collections::BTreeMap::new();
        for r in &s.rows {
            *counts.entry(r.clone()).or_insert(0usize) += 1;
        }
        let mut tv = 0.0;
        let mut var_bound = 0.0;
        for (k, p) in j.support.iter().zip(&j.probs) {
            let emp = *counts.get(k).unwrap_or(&0) as f64 / n as f64;
            tv += (emp - p).abs();
            var_bound += (p * (1.0 - p) / n as f64).sqrt();
        }
        let extra: usize = counts
            .iter()
            .filter(|(k, _)| j.prob(k) == 0.0)
            .map(|(_, c)| *c)
            .sum();
        assert_eq!(extra, 0, "sample outside exact support");
        tv *= 0.5;
        // E|emp - p| <= sigma per cell; 5 sigma on the summed bound
        assert!(tv < 5.0 * 0.5 * var_bound, "seed {seed}: tv={tv} bound={var_bound}");
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn do_is_idempotent_and_commutes(seed in 0u64..1000, v1 in 0u32..3, v2 in 0u32..3) {
            let scm = crate::models::random_dag(seed, 4, 2);
            let c0 = scm.cardinality(scm.id("V0").unwrap());
            let c2 = scm.cardinality(scm.id("V2").unwrap());
            let d1 = a(&[("V0", v1 % c0)]);
            let d2 = a(&[("V2", v2 % c2)]);
            let once = scm.intervene(&d1).unwrap();
            let twice = once.intervene(&d1).unwrap();
            prop_assert_eq!(once.to_spec(), twice.to_spec());
            let ab = scm.intervene(&d1).unwrap().intervene(&d2).unwrap();
            let ba = scm.intervene(&d2).unwrap().intervene(&d1).unwrap();
            prop_assert_eq!(ab.to_spec(), ba.to_spec());
        }

        #[test]
        fn tables_normalise(seed in 0u64..1000) {
            let scm = crate::models::random_dag(seed, 5, 2);
            let j = scm.joint().unwrap();
            prop_assert!((j.total() - 1.0).abs() < 1e-9);
            prop_assert!(j.probs.iter().all(|&p| p >= 0.0));
        }
    }
}
