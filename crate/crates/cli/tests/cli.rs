use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn files(dir: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(corpus().join(dir)).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn gradsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradsk")).args(args).output().expect("binary runs")
}

fn run_json(cmd: &str, path: &Path, extra: &[&str]) -> Value {
    let p = path.to_str().unwrap();
    let mut args = vec![cmd, p];
    args.extend_from_slice(extra);
    let out = gradsk(&args);
    assert!(out.status.success(), "{cmd} {p}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(cmd: &str, path: &Path, extra: &[&str]) -> i32 {
    let p = path.to_str().unwrap();
    let mut args = vec![cmd, p];
    args.extend_from_slice(extra);
    gradsk(&args).status.code().unwrap()
}

#[test]
fn sk1_on_the_q5_example() {
    let r = run_json("sk1", &corpus().join("rings/tot_ram_q5_n4_e2.json"), &[]);
    assert_eq!(r["sk1"]["invariant_factors"], serde_json::json!([2]));
    assert_eq!(r["method"], "TotallyRamifiedMu");
    assert_eq!(r["checks"]["n_torsion"], true);
    let d = run_json("sk1", &corpus().join("descriptors/tot_ram_q5_n4_e2.json"), &[]);
    assert_eq!(d["sk1"], r["sk1"]);
}

#[test]
fn classify_descriptors() {
    let r = run_json("classify", &corpus().join("descriptors/unram_q3_m4.json"), &["--format", "json"]);
    assert_eq!(r["classification"], "Unramified");
    let out = gradsk(&["classify", corpus().join("descriptors/unram_q3_m4.json").to_str().unwrap(), "--format", "text"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("Unramified\n"));
    assert_eq!(run_json("classify", &corpus().join("descriptors/other_q5_m2.json"), &[])["classification"], "Other");
}

#[test]
fn sk1_and_brute_force_agree_on_the_corpus() {
    let rings = files("rings");
    assert!(rings.len() >= 30);
    for f in rings {
        let a = run_json("sk1", &f, &[]);
        let b = run_json("sk1-brute", &f, &[]);
        assert_eq!(b["method"], "BruteForce");
        assert_eq!(
            serde_json::to_string(&a["sk1"]).unwrap(),
            serde_json::to_string(&b["sk1"]).unwrap(),
            "{}",
            f.display()
        );
    }
}

#[test]
fn reports_carry_hash_and_version() {
    let f = corpus().join("rings/semi_q3_m2_s1.json");
    let r = run_json("sh1", &f, &[]);
    assert_eq!(r["input_sha256"], hex::encode(Sha256::digest(fs::read(&f).unwrap())));
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["command"], "sh1");
    assert_eq!(r["t0_component"]["invariant_factors"], serde_json::json!([]));
}

#[test]
fn output_is_deterministic_for_a_seed() {
    let f = corpus().join("matdiv/gf9_ell2.json");
    let p = f.to_str().unwrap();
    let a = gradsk(&["congruence-check", p, "--seed", "11", "--precision", "16"]);
    let b = gradsk(&["congruence-check", p, "--seed", "11", "--precision", "16"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let w = corpus().join("wedderburn/gf9_frob_all.json");
    let a = gradsk(&["wedderburn", w.to_str().unwrap()]);
    let b = gradsk(&["wedderburn", w.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = std::env::temp_dir().join(format!("gradsk-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let out = dir.join("ck1.json");
    let f = corpus().join("descriptors/unram_q3_m4.json");
    let o = gradsk(&["ck1", f.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["ck1"]["invariant_factors"], serde_json::json!([40]));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let c = corpus();
    // schema errors
    assert_eq!(code("frobnicate", &c.join("rings/semi_q3_m2_s1.json"), &[]), 1);
    assert_eq!(code("sk1", &c.join("does-not-exist.json"), &[]), 1);
    assert_eq!(code("sk1-brute", &c.join("descriptors/unram_q3_m4.json"), &[]), 1);
    assert_eq!(code("sk1", &c.join("skew/gf9_frob_x2_minus_1.json"), &[]), 1);
    assert_eq!(code("classify", &c.join("descriptors/bad_fundamental_equality.json"), &[]), 1);
    // unsupported
    assert_eq!(code("sk1", &c.join("descriptors/other_q5_m2.json"), &[]), 2);
    assert_eq!(code("sk1", &c.join("rings/semi_q3_m2_s1.json"), &["--method", "TotallyRamifiedMu"]), 2);
    // budgets
    assert_eq!(code("sk1-brute", &c.join("rings/semi_q3_m2_s1.json"), &["--budget", "4"]), 3);
    assert_eq!(code("wedderburn", &c.join("wedderburn/gf81_frob_z.json"), &["--budget", "10"]), 3);
    // domain errors
    assert_eq!(code("skew-reduce", &c.join("skew/gf9_frob_reduce_mismatch.json"), &[]), 1);
    assert_eq!(code("norm-preimage", &c.join("towers/gf5_wild.json"), &[]), 1);
    assert_eq!(code("hensel", &c.join("hensel/double_root.json"), &[]), 1);
    assert_eq!(code("congruence-check", &c.join("matdiv/gf9_bad_base.json"), &[]), 1);
}

#[test]
fn forced_method_matches_selection() {
    let f = corpus().join("rings/tot_ram_q13_2x2.json");
    let a = run_json("sk1", &f, &[]);
    let b = run_json("sk1", &f, &["--method", "BruteForce"]);
    assert_eq!(a["sk1"], b["sk1"]);
    assert_eq!(b["method"], "BruteForce");
}

#[test]
fn module_commands() {
    let c = corpus();
    assert_eq!(run_json("nondegenerate", &c.join("modules/z2z2_nonzero_class.json"), &[])["nondegenerate"], true);
    assert_eq!(run_json("nondegenerate", &c.join("modules/z2z2_zero_class.json"), &[])["nondegenerate"], false);
    let r = run_json("nondegenerate", &c.join("modules/cyclic_z4_trivial.json"), &[]);
    assert_eq!(r["nondegenerate"], true);
    assert_eq!(r["certificates"].as_array().unwrap().len(), 0);
}

#[test]
fn skew_commands() {
    let c = corpus();
    let r = run_json("skew-divisor", &c.join("skew/gf9_frob_x2_minus_1.json"), &[]);
    assert_eq!(r["degree"], 2);
    assert_eq!(r["factorization"]["factors"].as_array().unwrap().len(), 2);
    let q = run_json("skew-divisor", &c.join("skew/gf9_frob_reduce_swap.json"), &[]);
    assert_eq!(q["divisor"], serde_json::json!([]));
    for f in ["skew/gf9_frob_reduce_swap.json", "skew/gf8_frob2_reduce.json"] {
        let r = run_json("skew-reduce", &c.join(f), &[]);
        assert_eq!(r["verified"], true);
        assert!(r["d"].is_u64());
    }
}

#[test]
fn series_and_tower_commands() {
    let c = corpus();
    let r = run_json("hensel", &c.join("hensel/sqrt_one_plus_t.json"), &[]);
    assert!(r["root"].as_str().unwrap().starts_with("t^0 * (1 + 3*t + 3*t^2 + 1*t^3"));
    assert!(r["residual_valuation"].as_i64().unwrap() >= 32);
    let r = run_json("hensel", &c.join("hensel/factor_x2_minus_one_plus_t.json"), &["--precision", "20"]);
    assert!(r["product_agreement"].as_i64().unwrap() >= 20);
    for f in files("towers") {
        let name = f.file_name().unwrap().to_str().unwrap().to_string();
        if name.contains("wild") || name.contains("not_one_unit") {
            continue;
        }
        let r = run_json("norm-preimage", &f, &[]);
        assert!(r["attained"].as_i64().unwrap() >= 32, "{name}");
        assert_eq!(r["graded_norm_check"], true, "{name}");
    }
    let r = run_json("norm-preimage", &c.join("towers/gf5_ram2.json"), &["--precision", "12"]);
    assert_eq!(r["precision"], 12);
}

#[test]
fn wedderburn_and_congruence_commands() {
    for f in files("wedderburn") {
        let r = run_json("wedderburn", &f, &[]);
        let ok = r.get("verified").or_else(|| r.get("all_verified")).unwrap();
        assert_eq!(ok, true, "{}", f.display());
    }
    for f in files("matdiv") {
        if f.to_str().unwrap().contains("bad_base") {
            continue;
        }
        let r = run_json("congruence-check", &f, &["--precision", "24"]);
        assert_eq!(r["s_in_j"], true);
        assert_eq!(r["in_one_plus_m"], true);
        assert_eq!(r["diagonal"]["consistent"], true);
    }
}
