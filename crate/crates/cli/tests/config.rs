use std::path::Path;

use affwalk::config::{shipped, RunConfig};
use affwalk::error::CliError;
use proptest::prelude::*;

const TREE: &str = r#"{
  "flavor": "building",
  "system": { "kind": "A", "rank": 1, "q": [2.0] },
  "walk": { "steps": [{ "mu": [1], "a": 1.0 }] },
  "grid": { "N": 64 },
  "sweep": { "n_list": [10], "epsilon": 0.05, "K": 1.0 }
}"#;

fn parse(text: &str) -> Result<RunConfig, CliError> {
    RunConfig::from_json(text, Path::new("test.json"))
}

#[test]
fn minimal_tree_config_is_valid() {
    let cfg = parse(TREE).unwrap();
    assert_eq!(cfg.system.rank, 1);
    assert_eq!(cfg.kernel().unwrap().rank(), 1);
}

#[test]
fn shipped_configs_round_trip() {
    for (name, cfg) in shipped() {
        let again = parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{name}");
    }
}

#[test]
fn probabilities_must_sum_to_one() {
    let text = TREE.replace(r#""a": 1.0"#, r#""a": 0.9"#);
    let msg = parse(&text).unwrap_err().to_string();
    assert!(msg.contains("walk.steps probabilities must sum to 1"), "{msg}");
}

#[test]
fn rank_mismatch_is_rejected() {
    let text = TREE.replace(r#""mu": [1]"#, r#""mu": [1, 0]"#);
    let msg = parse(&text).unwrap_err().to_string();
    assert!(msg.contains("system.rank"), "{msg}");
}

#[test]
fn unknown_key_is_rejected_with_position() {
    let text = TREE.replace(r#""grid": { "N": 64 }"#, r#""grid": { "N": 64, "M": 3 }"#);
    match parse(&text).unwrap_err() {
        CliError::Parse { line, msg, .. } => {
            assert_eq!(line, 5);
            assert!(msg.contains("unknown field"), "{msg}");
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn lattice_rejects_building_fields() {
    let text = r#"{
      "flavor": "lattice",
      "system": { "kind": "A", "rank": 1 },
      "walk": { "steps": [{ "mu": [1], "a": 0.5 }, { "mu": [-1], "a": 0.5 }] },
      "sweep": { "n_list": [10] }
    }"#;
    assert!(parse(text).is_err());
}

proptest! {
    #[test]
    fn lattice_configs_round_trip(ws in proptest::collection::vec(1u32..100, 1..5), eps in 0.001f64..0.5) {
        let total: u32 = ws.iter().sum();
        let steps: Vec<String> = ws
            .iter()
            .enumerate()
            .map(|(i, w)| format!(r#"{{ "mu": [{}], "a": {} }}"#, i as i64 - 2, *w as f64 / total as f64))
            .collect();
        let text = format!(
            r#"{{ "flavor": "lattice", "system": {{ "rank": 1 }}, "walk": {{ "steps": [{}] }},
                 "sweep": {{ "n_list": [5], "epsilon": {eps} }} }}"#,
            steps.join(",")
        );
        if let Ok(cfg) = parse(&text) {
            prop_assert_eq!(parse(&cfg.to_json()).unwrap(), cfg);
        }
    }
}
