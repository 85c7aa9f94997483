use gpack_demo::{generate_json, pack_json, verify_json};
use serde_json::Value;

#[test]
fn generate_pack_verify() {
    let seq = generate_json("random-trees", 40, 3, 2, 0.9).unwrap();
    let reply: Value = serde_json::from_str(&pack_json(&seq, "4/5", 2).unwrap()).unwrap();
    assert_eq!(reply["verified"], true);
    assert_eq!(reply["N"], 72);
    let packing = reply["packing"].to_string();
    let report: Value = serde_json::from_str(&verify_json(&seq, &packing).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn tampered_packing_fails() {
    let seq = generate_json("caterpillars", 30, 3, 1, 0.8).unwrap();
    let reply: Value = serde_json::from_str(&pack_json(&seq, "4/5", 0).unwrap()).unwrap();
    let mut packing = reply["packing"].clone();
    let maps = packing["maps"].as_array_mut().unwrap();
    maps[1]["map"] = maps[0]["map"].clone();
    let report: Value =
        serde_json::from_str(&verify_json(&seq, &packing.to_string()).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn errors_are_messages() {
    assert!(generate_json("nope", 10, 3, 0, 0.9)
        .unwrap_err()
        .contains("unknown"));
    assert!(pack_json("{", "4/5", 0)
        .unwrap_err()
        .starts_with("sequence"));
    let seq = generate_json("random-trees", 10, 3, 0, 0.9).unwrap();
    assert!(pack_json(&seq, "x", 0).unwrap_err().starts_with("epsilon"));
}
