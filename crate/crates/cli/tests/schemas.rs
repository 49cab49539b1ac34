use std::path::Path;

use serde_json::Value;
use umlsem_cli::run;

fn root(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel).display().to_string()
}

fn cli(args: &[String]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("umlsem".to_string()).chain(args.iter().cloned()),
        &mut out,
        &mut err,
    );
    (code, String::from_utf8(out).unwrap())
}

fn args(parts: &[&str]) -> Vec<String> {
    parts.iter().map(|p| p.to_string()).collect()
}

fn assert_valid(schema: &str, instance: &Value) {
    let text = std::fs::read_to_string(root(&format!("docs/schemas/{schema}"))).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{instance:#}");
}

fn json(out: &str) -> Value {
    serde_json::from_str(out).unwrap()
}

#[test]
fn parse_output() {
    let (code, out) = cli(&args(&["parse", "--format", "json", &root("corpus/phone")]));
    assert_eq!(code, 0);
    assert_valid("parse.schema.json", &json(&out));
}

#[test]
fn simulate_summary_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let (code, out) = cli(&args(&[
        "simulate",
        "--format",
        "json",
        "--horizon",
        "12",
        "--out",
        trace.to_str().unwrap(),
        &root("corpus/phone"),
    ]));
    assert_eq!(code, 0, "{out}");
    assert_valid("simulate.schema.json", &json(&out));
    let lines = std::fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().count() > 2);
    for line in lines.lines() {
        assert_valid("trace-record.schema.json", &json(line));
    }
}

#[test]
fn conform_reports() {
    let phone: Vec<String> = ["model.uml", "caller.stm", "exchange.stm", "receiver.stm", "system.snap"]
        .iter()
        .map(|f| root(&format!("corpus/phone/{f}")))
        .collect();
    for seq in ["corpus/phone/call.seq", "corpus/phone/mutants/swapped.seq"] {
        let mut a = args(&["conform", "--format", "json"]);
        a.extend(phone.iter().cloned());
        a.push(root(seq));
        let (_, out) = cli(&a);
        let v = json(&out);
        assert_valid("conform.schema.json", &v);
        if let Some(witness) = v[0]["witness"].as_array() {
            for record in witness {
                assert_valid("trace-record.schema.json", record);
            }
        }
    }
}

#[test]
fn check_reports() {
    let warehouse = root("corpus/warehouse");
    let stm = root("corpus/warehouse/branch.stm");
    let mut cases = vec![args(&["check", "--format", "json", &root("corpus/phone")])];
    for m in ["multiplicity.snap", "asymmetric.snap", "sharing.snap", "abstract.snap"] {
        cases.push(args(&[
            "check",
            "--format",
            "json",
            &format!("{warehouse}/model.uml"),
            &stm,
            &format!("{warehouse}/mutants/{m}"),
        ]));
    }
    cases.push(args(&[
        "check",
        "--format",
        "json",
        "--refine",
        &format!("{stm}={stm}"),
        &format!("{warehouse}/model.uml"),
        &stm,
        &format!("{warehouse}/system.snap"),
    ]));
    for a in cases {
        let (_, out) = cli(&a);
        assert_valid("check.schema.json", &json(&out));
    }
}

#[test]
fn refine_result() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str, text: &str| {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path.display().to_string()
    };
    let model = p("m.uml", "class P { op go() op a() op b() }\nassoc out P[0..1] -- P[0..1]");
    let both = p("both.stm", "statechart P\ninitial A\nstate A\ntrans A -> A on go / out!a()\ntrans A -> A on go / out!b()");
    let one = p("one.stm", "statechart P\ninitial A\nstate A\ntrans A -> A on go / out!a()");
    for (abs, conc) in [(&both, &one), (&one, &both)] {
        let (_, out) = cli(&args(&["refine", "--format", "json", "--horizon", "3", &model, abs, conc]));
        assert_valid("refine.schema.json", &json(&out));
    }
}
