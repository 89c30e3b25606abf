mod common;

use common::brute_force;
use twincf::causation::{
    counterfactual_table, poc_exact, poc_from_model, poc_queries, forbidden_residuals, CfTemplate, Source,
};
use twincf::datagen::{confounded_scm, credit7_scm, gen_unconfounded, unconfounded_scm};
use twincf::learn::{Columns, ModelConfig, TwinModel};
use twincf::models::{eq2, random_treatment_outcome, Shape, TreatmentOutcomeConfig};
use twincf::ordering::{check_cf_ordering, OrderingSpec};
use twincf::scm::{Cmp, Scm};
use twincf::twin::EventSpec;
use twincf::Error;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn poc_unconfounded_uniform() {
    let scm = unconfounded_scm([1.0 / 3.0; 3], 0.5).unwrap();
    let p = poc_exact(&scm, "X", "Y").unwrap();
    assert!(close(p.pn.value, 0.5, 1e-12));
    assert!(close(p.ps.value, 0.5, 1e-12));
    assert!(close(p.pns.value, 1.0 / 3.0, 1e-12));
    assert_eq!(p.pn.stderr, 0.0);
}

#[test]
fn poc_confounded_uniform() {
    // X is independent of Z here: PN = q0 pz / (q0 pz + q2),
    // PS = q0 pz / (q0 + q1), PNS = q0 pz
    let scm = confounded_scm([1.0 / 3.0; 3], 0.5, 0.5).unwrap();
    let p = poc_exact(&scm, "X", "Y").unwrap();
    let (a, q) = (1.0 / 6.0, 1.0 / 3.0);
    assert!(close(p.pn.value, a / (a + q), 1e-12), "{}", p.pn.value);
    assert!(close(p.ps.value, a / (2.0 * q), 1e-12), "{}", p.ps.value);
    assert!(close(p.pns.value, a, 1e-12));
}

#[test]
fn poc_deterministic_identity() {
    let scm = eq2([1.0, 0.0, 0.0, 0.0], 0.5);
    let p = poc_exact(&scm, "X", "Y").unwrap();
    for v in [p.pn.value, p.ps.value, p.pns.value] {
        assert!(close(v, 1.0, 1e-12));
    }
}

#[test]
fn poc_queries_match_oracle() {
    let scm = eq2([0.4, 0.1, 0.3, 0.2], 0.3);
    let p = poc_exact(&scm, "X", "Y").unwrap();
    let got = [p.pn.value, p.ps.value, p.pns.value];
    for (q, v) in poc_queries("X", "Y").iter().zip(got) {
        assert!(close(brute_force(&scm, q).unwrap(), v, 1e-12));
    }
}

#[test]
fn poc_needs_binary_variables() {
    let scm = credit7_scm().unwrap();
    assert!(matches!(poc_exact(&scm, "X", "Y"), Err(Error::NonBinary { .. })));
}

#[test]
fn poc_json() {
    let scm = unconfounded_scm([1.0 / 3.0; 3], 0.5).unwrap();
    let p = poc_exact(&scm, "X", "Y").unwrap();
    let v: serde_json::Value = serde_json::to_value(p).unwrap();
    assert_eq!(v["pn"]["value"], 0.5);
    assert_eq!(v["pns"]["stderr"], 0.0);
}

#[test]
fn poc_from_model_is_deterministic() {
    let g = gen_unconfounded([1.0 / 3.0; 3], 0.5, 200, 1).unwrap();
    let model = TwinModel::new(ModelConfig::new(0, 1, 2, 2), 4).unwrap();
    let cols = Columns::new("X", "Y", &[]);
    let a = poc_from_model(&model, &g.data, &cols, 20_000, 3).unwrap();
    let b = poc_from_model(&model, &g.data, &cols, 20_000, 3).unwrap();
    assert_eq!(a, b);
}

/// Both heads output `Y = 1` iff `u > 0`.
fn sign_model() -> TwinModel {
    let mut c = ModelConfig::new(0, 1, 2, 2);
    c.u_out = 1;
    let mut m = TwinModel::zeros(c).unwrap();
    m.identity_noise_block().unwrap();
    let u = m.config.z_out;
    for h in &mut m.heads {
        h.layers[0].w[[0, u]] = 1.0;
        h.layers[0].w[[1, u]] = -1.0;
        h.layers[1].w[[1, 0]] = 1e6;
        h.layers[1].w[[0, 1]] = 1e6;
    }
    m
}

#[test]
fn identical_heads_have_no_effect() {
    let g = gen_unconfounded([1.0 / 3.0; 3], 0.5, 200, 1).unwrap();
    let cols = Columns::new("X", "Y", &[]);
    let p = poc_from_model(&sign_model(), &g.data, &cols, 20_000, 8).unwrap();
    assert_eq!(p.pns.value, 0.0);
    assert_eq!(p.pn.value, 0.0);
    assert_eq!(p.ps.value, 0.0);
}

#[test]
fn poc_without_matching_draws_fails() {
    let g = gen_unconfounded([1.0 / 3.0; 3], 0.5, 200, 1).unwrap();
    let cols = Columns::new("X", "Y", &[]);
    let mut m = TwinModel::zeros(ModelConfig::new(0, 1, 2, 2)).unwrap();
    for h in &mut m.heads {
        h.layers.last_mut().unwrap().b[0] = 100.0;
    }
    // Y = 0 under both treatments, so PN's evidence Y = 1 never occurs
    let p = poc_from_model(&m, &g.data, &cols, 5_000, 3);
    assert!(matches!(p, Err(Error::NoAcceptedSamples { .. })));
}

fn tmpl() -> CfTemplate {
    CfTemplate { evidence_outcome: 0, target: EventSpec { op: Cmp::Ge, value: 1 } }
}

#[test]
fn credit7_exact_table() {
    let scm = credit7_scm().unwrap();
    let ord = OrderingSpec::identity("X", "Y", 3, 3);
    let t = counterfactual_table(&Source::Scm(&scm), &tmpl(), &ord, 0, 0).unwrap();
    for r in 0..3 {
        assert_eq!(t.entries[r][r].unwrap().value, 0.0);
    }
    assert!(t.dominance > 0.0);
    // monotone model: no lower-triangle mass can leave the worst outcome
    for r in 0..3 {
        for c in 0..r {
            assert!(t.entries[r][c].unwrap().value.abs() < 1e-12);
        }
    }
    let mut csv = Vec::new();
    t.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("T\\T',0,1,2\n0,0.000000,"));
}

#[test]
fn exact_and_sampled_tables_agree() {
    for seed in 0..4 {
        let scm = random_treatment_outcome(
            seed,
            TreatmentOutcomeConfig { treatments: 3, outcomes: 3, latent_card: 4, confounder_card: 2, shape: Shape::Free },
        );
        let ord = OrderingSpec::identity("X", "Y", 3, 3);
        let ex = counterfactual_table(&Source::Scm(&scm), &tmpl(), &ord, 0, 0).unwrap();
        let mc = counterfactual_table(&Source::ScmMc(&scm), &tmpl(), &ord, 40_000, seed).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                match (ex.entries[r][c], mc.entries[r][c]) {
                    (Some(e), Some(m)) => assert!(m.within(e.value, 4.0) || (m.value - e.value).abs() < 1e-12, "seed {seed} ({r},{c}): {e:?} vs {m:?}"),
                    (None, None) => {}
                    other => panic!("seed {seed} ({r},{c}): {other:?}"),
                }
            }
        }
    }
}

#[test]
fn residuals_vanish_on_monotone_models() {
    let mut seen = 0;
    for seed in 0..30 {
        let scm: Scm = random_treatment_outcome(
            seed,
            TreatmentOutcomeConfig { treatments: 3, outcomes: 3, latent_card: 3, confounder_card: 2, shape: Shape::Monotone },
        );
        let ord = OrderingSpec::identity("X", "Y", 3, 3);
        assert!(check_cf_ordering(&scm, &ord).unwrap().is_empty());
        let r = forbidden_residuals(&Source::Scm(&scm), &ord, 0, 0).unwrap();
        assert_eq!(r.blocks.len(), 3);
        assert!(r.max_forbidden() <= 1e-12, "seed {seed}");
        seen += 1;
    }
    assert_eq!(seen, 30);
}

#[test]
fn residuals_flag_violations() {
    // Y = 1 - X for every u: Y_{x=0} = 1 while Y_{x=1} = 0
    let scm = eq2([0.0, 0.0, 0.0, 1.0], 0.5);
    let ord = OrderingSpec::identity("X", "Y", 2, 2);
    let r = forbidden_residuals(&Source::Scm(&scm), &ord, 0, 0).unwrap();
    let v = r.violations(0.02);
    assert_eq!(v.len(), 1);
    assert_eq!((v[0].i, v[0].j, v[0].h, v[0].l), (1, 0, 0, 1));
    assert!(close(v[0].value, 1.0, 1e-12));
    // Y_{x=1} = 1 never happens, so that row is undefined
    assert!(r.blocks[0].matrix[1].iter().all(|e| e.is_none()));
    let mc = forbidden_residuals(&Source::ScmMc(&scm), &ord, 5_000, 1).unwrap();
    assert!(close(mc.max_forbidden(), 1.0, 1e-12));
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("pair,1,0\nP,0,1\n0,0.000000,1.000000\n1,,\n"), "{text}");
}
