use gwv_core::registry::{list_scenes, run_scene, Provenance, Row, SceneConfig};
use gwv_core::GwvError;

#[cfg(feature = "empty-registry")]
#[test]
fn empty_build_reports_no_scenes() {
    let e = list_scenes().unwrap_err();
    assert_eq!(e, GwvError::EmptyRegistry);
    assert_eq!(e.to_string(), "no scenes compiled");
    assert_eq!(run_scene("conc", &SceneConfig::default()).unwrap_err(), GwvError::EmptyRegistry);
}

#[cfg(not(feature = "empty-registry"))]
#[test]
fn registry_lists_required_scenes_with_provenance() {
    let scenes = list_scenes().unwrap();
    for name in ["osc", "conc", "concdiff", "cusp", "cross", "triple", "trisegment"] {
        let s = scenes.iter().find(|s| s.name == name).unwrap();
        assert!(!s.expected.is_empty());
    }
    assert!(scenes.iter().flat_map(|s| &s.expected).any(|e| e.provenance == Provenance::Paper));
    assert!(scenes.iter().flat_map(|s| &s.expected).any(|e| e.provenance == Provenance::Derived));
}

#[cfg(not(feature = "empty-registry"))]
#[test]
fn config_validation() {
    let bad = |cfg: SceneConfig, name: &str| run_scene(name, &cfg).unwrap_err();
    assert_eq!(bad(SceneConfig { p: Some(1.0), ..Default::default() }, "conc"), GwvError::BadExponent);
    assert!(matches!(bad(SceneConfig { grid: Some(32), ..Default::default() }, "disk"), GwvError::Invalid(_)));
    assert!(matches!(bad(SceneConfig { levels: Some(4), ..Default::default() }, "disk"), GwvError::Invalid(_)));
    assert!(matches!(bad(SceneConfig { samples: Some(10), ..Default::default() }, "conc"), GwvError::Invalid(_)));
    assert!(matches!(bad(SceneConfig { p: Some(2.0), ..Default::default() }, "osc"), GwvError::Invalid(_)));
    assert_eq!(bad(SceneConfig::default(), "nope"), GwvError::UnknownScene("nope".into()));
}

#[test]
fn row_pass_rule_is_absolute() {
    assert!(Row::new("a", 1.0, 1.5, 0.5, Provenance::Trivial).pass);
    assert!(!Row::new("a", 1.0, 1.5, 0.49, Provenance::Trivial).pass);
    assert!(Row::rel("b", 99.0, 100.0, 0.01, Provenance::Trivial).pass);
    assert!(!Row::verdict("c", false, Provenance::Trivial).pass);
    assert!(!Row::new("d", f64::NAN, 0.0, 1.0, Provenance::Trivial).pass);
}

#[cfg(not(feature = "empty-registry"))]
#[test]
fn tolerance_override_rejudges() {
    let mut cfg = SceneConfig::default();
    cfg.tolerances.insert("W(V_nu_h) h=8".into(), 0.0);
    let rep = run_scene("conc", &cfg).unwrap();
    assert!(!rep.all_pass());
    assert_eq!(rep.rows.iter().filter(|r| !r.pass).count(), 1);
}
