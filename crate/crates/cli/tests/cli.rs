use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn path(rel: &str) -> String {
    root().join(rel).display().to_string()
}

fn gcdkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcdkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(
        text.trim_end().lines().count(),
        1,
        "one compact document: {text}"
    );
    serde_json::from_str(&text).unwrap()
}

fn stderr_error(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    let line = text.lines().last().expect("error line on stderr");
    serde_json::from_str(line).unwrap()
}

fn write_jsonl(path: &Path, lines: &[&str]) {
    let body: String = lines.iter().map(|l| json!(l).to_string() + "\n").collect();
    std::fs::write(path, body).unwrap();
}

#[test]
fn mask_on_toy_grammar() {
    let g = path("grammars/g1.gcd");
    let v = path("data/v1.json");
    let out = gcdkit(&["mask", "--grammar", &g, "--vocab", &v]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out), json!({"allowed": [0, 3], "eos": false}));

    let out = gcdkit(&[
        "mask",
        "--grammar",
        &g,
        "--vocab",
        &v,
        "--prefix-bytes",
        "ab",
    ]);
    assert_eq!(stdout_json(&out), json!({"allowed": [], "eos": true}));

    let out = gcdkit(&[
        "mask",
        "--grammar",
        &g,
        "--vocab",
        &v,
        "--prefix-bytes",
        "hex:61",
    ]);
    assert_eq!(stdout_json(&out), json!({"allowed": [1, 2], "eos": false}));
}

#[test]
fn mask_rejects_non_viable_prefix() {
    let out = gcdkit(&[
        "mask",
        "--grammar",
        &path("grammars/g1.gcd"),
        "--vocab",
        &path("data/v1.json"),
        "--prefix-bytes",
        "b",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_error(&out)["error"]["kind"], "non-viable-prefix");
}

#[test]
fn compile_reports_diagnostics_and_exit_codes() {
    let cie = path("grammars/cie.gcd");
    let out = gcdkit(&["compile", "--grammar", &cie, "--check"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["clean"], false);
    let kinds: Vec<&str> = doc["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["unbound-lexset", "unbound-lexset"]);

    let ents = format!("entities={}", path("data/entities.txt"));
    let rels = format!("relations={}", path("data/relations.txt"));
    let out = gcdkit(&[
        "compile",
        "--grammar",
        &cie,
        "--catalog",
        &ents,
        "--catalog",
        &rels,
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["clean"], true);
    assert_eq!(doc["catalogs"]["entities"], 8);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gcd");
    std::fs::write(&bad, "S ::= \"a\" T;\nU ::= \"b\";").unwrap();
    let out = gcdkit(&["compile", "--grammar", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    let kinds: Vec<&str> = doc["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"undefined-nonterminal"));
    assert!(kinds.contains(&"unreachable-nonterminal"));

    std::fs::write(&bad, "S ::= \"a").unwrap();
    let out = gcdkit(&["compile", "--grammar", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "grammar-syntax");

    let out = gcdkit(&["compile", "--grammar", "/nonexistent/g.gcd"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "io");
}

#[test]
fn usage_errors_are_json_with_status_two() {
    let out = gcdkit(&["decode", "--task", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "usage");
    let out = gcdkit(&["decode", "--task", "cp", "--vocab", "synth:512"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decoded_parses_pass_validity() {
    let dir = tempfile::tempdir().unwrap();
    let gold = "[S [NP Nkurunziza] [VP leads [NP Burundi] [PP from [NP Gitega]]]]";
    let mut preds = Vec::new();
    for seed in 0..5 {
        let scorer = format!("random:{seed}");
        let out = gcdkit(&[
            "decode",
            "--task",
            "cp",
            "--instance",
            &path("data/cp_instance.json"),
            "--vocab",
            "synth:4096",
            "--scorer",
            &scorer,
            "--beam",
            "3",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let doc = stdout_json(&out);
        assert_eq!(doc["validity"]["valid"], true);
        preds.push(doc["best"].as_str().unwrap().to_owned());
    }
    let pred_path = dir.path().join("pred.jsonl");
    let gold_path = dir.path().join("gold.jsonl");
    write_jsonl(
        &pred_path,
        &preds.iter().map(String::as_str).collect::<Vec<_>>(),
    );
    write_jsonl(&gold_path, &[gold; 5]);
    let out = gcdkit(&[
        "eval",
        "--task",
        "cp",
        "--pred",
        pred_path.to_str().unwrap(),
        "--gold",
        gold_path.to_str().unwrap(),
        "--validity",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let doc = stdout_json(&out);
    assert_eq!(doc["validity"]["rate"], 1.0);
    assert_eq!(doc["leaf_mismatches"], 0);

    write_jsonl(&pred_path, &["[S Nkurunziza leads Burundi from]"]);
    write_jsonl(&gold_path, &[gold]);
    let out = gcdkit(&[
        "eval",
        "--task",
        "cp",
        "--pred",
        pred_path.to_str().unwrap(),
        "--gold",
        gold_path.to_str().unwrap(),
        "--validity",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["validity"]["failures"]["completeness"], 1);
}

#[test]
fn eval_cie_identity_and_ed_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.jsonl");
    write_jsonl(
        &p,
        &[
            "[s] Burundi [r] capital [o] Gitega",
            "[s] Nkurunziza [r] head of state [o] Burundi [s] Burundi [r] capital [o] Gitega",
        ],
    );
    let out = gcdkit(&[
        "eval",
        "--task",
        "cie",
        "--pred",
        p.to_str().unwrap(),
        "--gold",
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out), json!({"p": 1.0, "r": 1.0, "f1": 1.0}));

    let g = dir.path().join("g.jsonl");
    write_jsonl(&p, &["Direct current", "Dupont Circle"]);
    write_jsonl(&g, &["Direct current", "Direct current"]);
    let out = gcdkit(&[
        "eval",
        "--task",
        "ed",
        "--pred",
        p.to_str().unwrap(),
        "--gold",
        g.to_str().unwrap(),
    ]);
    assert_eq!(stdout_json(&out), json!({"accuracy": 0.5, "n": 2}));

    write_jsonl(&g, &["Direct current"]);
    let out = gcdkit(&[
        "eval",
        "--task",
        "ed",
        "--pred",
        p.to_str().unwrap(),
        "--gold",
        g.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_error(&out)["error"]["kind"], "length-mismatch");
}

#[test]
fn decode_is_deterministic_and_stays_in_the_candidates() {
    let args = [
        "decode",
        "--task",
        "ed",
        "--instance",
        &path("data/ed_instance.json"),
        "--vocab",
        "synth:4096",
        "--scorer",
        "random:11",
        "--beam",
        "4",
    ];
    let a = gcdkit(&args);
    let b = gcdkit(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let doc = stdout_json(&a);
    let candidates = ["Direct current", "Dupont Circle", "Washington, D.C."];
    assert!(candidates.contains(&doc["entity"].as_str().unwrap()));
    for h in doc["hypotheses"].as_array().unwrap() {
        let text = h["text"].as_str().unwrap();
        assert!(candidates
            .iter()
            .any(|c| text.ends_with(&format!("DC [{c}] </ent>"))));
    }
}

#[test]
fn replayed_empty_string_is_reported_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.gcd");
    std::fs::write(&g, "S ::= \"\" | \"ab\";").unwrap();
    let rows = dir.path().join("rows.jsonl");
    // ids: a b c ab bc eos
    std::fs::write(
        &rows,
        "[-3, null, null, -2, null, -0.1]\n[null, -0.1, null, null, null, -0.5]\n",
    )
    .unwrap();
    let scorer = format!("replay:{}", rows.display());
    let base = [
        "decode",
        "--task",
        "raw",
        "--grammar",
        g.to_str().unwrap(),
        "--vocab",
        &path("data/v1.json"),
        "--scorer",
        &scorer,
    ];
    let out = gcdkit(&base);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = stdout_json(&out);
    assert_eq!(doc["best"], "ab");
    assert_eq!(doc["empty_string_report"]["top_is_empty"], true);

    let mut keep = base.to_vec();
    keep.push("--allow-empty");
    let doc = stdout_json(&gcdkit(&keep));
    assert_eq!(doc["best"], "");
    assert_eq!(doc["hypotheses"][0]["ids"], json!([5]));
}

#[test]
fn decode_cie_outputs_parse_as_triplets() {
    let out = gcdkit(&[
        "decode",
        "--task",
        "cie",
        "--instance",
        &path("data/cie_instance.json"),
        "--vocab",
        "synth:4096",
        "--scorer",
        "random:2",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert!(doc["triplets"].is_array());
}

#[test]
fn build_prints_the_instance_grammar() {
    let out = gcdkit(&[
        "build",
        "--task",
        "ed",
        "--instance",
        &path("data/ed_instance.json"),
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert!(doc["grammar"].as_str().unwrap().contains("Dupont Circle"));
}

#[test]
fn bench_reports_latency() {
    let g = path("grammars/dyck.gcd");
    let out = gcdkit(&[
        "bench",
        "--grammar",
        &g,
        "--vocab",
        "synth:1024",
        "--steps",
        "150",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    for key in [
        "grammar",
        "vocab_size",
        "steps",
        "mean_us",
        "p50_us",
        "p95_us",
        "truncated",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["grammar"], "dyck");
    assert_eq!(doc["steps"], 150);

    let out = gcdkit(&[
        "bench",
        "--grammar",
        &g,
        "--vocab",
        "synth:1024",
        "--steps",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pretty_output_is_the_same_document() {
    let g = path("grammars/g1.gcd");
    let v = path("data/v1.json");
    let out = gcdkit(&["mask", "--grammar", &g, "--vocab", &v, "--pretty"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 1);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc, json!({"allowed": [0, 3], "eos": false}));
}
