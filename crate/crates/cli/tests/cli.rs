use std::process::{Command, Output};

fn aespipe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aespipe")).args(args).output().expect("run aespipe")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const KEY: &str = "000102030405060708090a0b0c0d0e0f";

#[test]
fn encrypt_and_decrypt_reference_vector() {
    let o = aespipe(&["encrypt", "--key", KEY, "00112233445566778899aabbccddeeff", "00000000000000000000000000000000"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines[0], "69c4e0d86a7b0430d8cdb78070b4c55a");
    assert_eq!(lines.len(), 2);
    let o = aespipe(&["decrypt", "--key", KEY, &lines[0], &lines[1]]);
    let back: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(back, ["00112233445566778899aabbccddeeff", "00000000000000000000000000000000"]);
}

#[test]
fn malformed_hex_names_the_argument() {
    let o = aespipe(&["encrypt", "--key", &KEY[..31], "00112233445566778899aabbccddeeff"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("key"));
    let o = aespipe(&["encrypt", "--key", KEY, "00112233445566778899aabbccddeeff", "zz"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("block 2"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(aespipe(&["bogus"]).status.code(), Some(1));
    assert_eq!(aespipe(&["model", "--mode", "enc"]).status.code(), Some(1));
    assert_eq!(aespipe(&["model", "--mode", "enc", "--blocks-count", "0"]).status.code(), Some(1));
    assert_eq!(aespipe(&["model", "--mode", "enc", "--blocks-count", "3", "--pe", "3", "--inner-parallel"]).status.code(), Some(1));
    assert_eq!(aespipe(&["model", "--mode", "enc", "--blocks-count", "3", "--t-ov", "-1"]).status.code(), Some(1));
    assert!(aespipe(&["--help"]).status.success());
}

#[test]
fn model_reports_table_values() {
    let o = aespipe(&["model", "--mode", "enc", "--blocks-count", "10", "--pe", "1"]);
    let s = stdout(&o);
    assert!(s.contains("pipeline time:            1024 T_XOR"), "{s}");
    assert!(s.contains("improvement 88.36% (~88%)"), "{s}");
    let o = aespipe(&["model", "--mode", "dec", "--blocks-count", "25", "--pe", "16", "--inner-parallel", "--format", "csv"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(row.split(',').nth(6), Some("277"));
    let o = aespipe(&["model", "--mode", "enc", "--blocks-count", "1", "--format", "csv"]);
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = row.split(',').collect();
    assert_eq!((f[5], f[6]), ("880", "880"));
}

#[test]
fn overhead_is_given_in_xor_units() {
    let o = aespipe(&["model", "--mode", "enc", "--blocks-count", "1", "--pe", "32", "--inner-parallel", "--t-ov", "1/2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["t_ov"], serde_json::json!({"num": 1, "den": 2}));
}

#[test]
fn simulate_agrees_with_model() {
    let o = aespipe(&["simulate", "--mode", "enc", "--blocks-count", "10", "--pe", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("makespan: 1720 T_XOR"), "{s}");
    assert!(s.contains("agreement: PASS"));
    let o = aespipe(&["simulate", "--mode", "enc", "--blocks-count", "1", "--pe", "1"]);
    assert!(stdout(&o).contains("makespan: 880 T_XOR"));
}

#[test]
fn functional_simulation_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = aespipe(&[
        "simulate", "--mode", "dec", "--blocks-count", "3", "--pe", "4", "--inner-parallel",
        "--functional", "--key", KEY, "--seed", "9", "--trace", trace.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("functional: OK (aes_core match)"));
    let text = std::fs::read_to_string(&trace).unwrap();
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["start"], "0");
    let o = aespipe(&[
        "simulate", "--mode", "enc", "--blocks-count", "1", "--functional", "--key", KEY,
        "--blocks", "00112233445566778899aabbccddeeff",
    ]);
    assert!(stdout(&o).contains("69c4e0d86a7b0430d8cdb78070b4c55a"));
}

#[test]
fn unsplittable_simulation_is_a_usage_error() {
    let o = aespipe(&["simulate", "--mode", "dec", "--blocks-count", "2", "--pe", "2", "--inner-parallel"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tables_audit_is_clean_and_deterministic() {
    let a = aespipe(&["tables"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = aespipe(&["tables"]);
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    assert!(s.contains("| 2(a) | M_r=8 | time | 234 | 234 | EXACT |"), "{s}");
    assert!(s.contains("| 1(a) | L=40 | time | 1556 | 1504 | ERRATA |"));
    let json: serde_json::Value = serde_json::from_str(&stdout(&aespipe(&["tables", "--format", "json"]))).unwrap();
    assert_eq!(json["clean"], true);
}

#[test]
fn sweep_formats_agree() {
    let args = ["sweep", "--mode", "enc,dec", "--blocks-count", "10,25,40", "--pe", "1,4,8", "--inner-parallel"];
    let csv = stdout(&aespipe(&[&args[..], &["--format", "csv"]].concat()));
    let json: serde_json::Value = serde_json::from_str(&stdout(&aespipe(&[&args[..], &["--format", "json"]].concat()))).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 18);
    for (line, obj) in rows.iter().zip(json.as_array().unwrap()) {
        let f: Vec<&str> = line.split(',').collect();
        let p = &obj["paper_pipeline_txor"];
        let as_text = if p["den"] == 1 { p["num"].to_string() } else { format!("{}/{}", p["num"], p["den"]) };
        assert_eq!(f[6], as_text);
        assert_eq!(f[1], obj["L"].to_string());
    }
    // Table 2(a) execution-time column, M_r = 4 and 8.
    assert!(rows.iter().any(|r| r.starts_with("enc,10,4,true,0,8800,388,")));
    assert!(rows.iter().any(|r| r.starts_with("enc,10,8,true,0,8800,234,")));
}

#[test]
fn sweep_with_simulation_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.md");
    let o = aespipe(&[
        "sweep", "--mode", "dec", "--blocks-count", "4", "--pe", "2,4", "--sim", "--format", "markdown",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("n/a"));
    let o = aespipe(&["sweep", "--blocks-count", "", "--pe", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = aespipe(&["sweep", "--blocks-count", "5", "--pe", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}
