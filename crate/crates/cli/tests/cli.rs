//! End-to-end tests of the `swivel` binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swivel"))
}

fn tmp(name: &str) -> PathBuf {
    let mut dir = std::env::temp_dir();
    dir.push(format!("swivel-cli-test-{}-{name}", std::process::id()));
    dir
}

#[test]
fn gen_is_idempotent_per_seed() {
    let a = tmp("gen-a.json");
    let b = tmp("gen-b.json");
    for path in [&a, &b] {
        let status = bin()
            .args(["gen", "--dims", "2,2", "--kraus", "2", "--seed", "7", "-o"])
            .arg(path)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same seed must produce byte-identical files");
}

#[test]
fn gen_tripartite_produces_cmi_ready_instance() {
    let path = tmp("gen-tri.json");
    let status = bin()
        .args(["gen", "--tripartite", "2,2,2", "--seed", "9", "-o"])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let file = swivel_core::states::InstanceFile::from_json(&text).unwrap();
    assert_eq!(file.labels.get("structure").map(String::as_str), Some("tripartite"));
    let inst = file.to_instance().unwrap();
    assert!(inst.swivel_restriction().is_some());
    assert!(inst.support_ok());
}

#[test]
fn sweep_is_deterministic_and_embeds_digest() {
    let inst = tmp("sweep-inst.json");
    assert!(bin()
        .args(["gen", "--dims", "2", "--kraus", "2", "--seed", "5", "-o"])
        .arg(&inst)
        .status()
        .unwrap()
        .success());
    let out1 = tmp("sweep-1.csv");
    let out2 = tmp("sweep-2.csv");
    for out in [&out1, &out2] {
        assert!(bin()
            .args(["sweep", "--quantity", "delta-prime", "--grid", "0.5,1.5,2.0", "--instance"])
            .arg(&inst)
            .arg("-o")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    let text1 = std::fs::read_to_string(&out1).unwrap();
    let text2 = std::fs::read_to_string(&out2).unwrap();
    assert_eq!(text1, text2, "sweep reruns must be byte-identical");
    let mut lines = text1.lines();
    let header_comment = lines.next().unwrap();
    assert!(header_comment.starts_with("# swivel "));
    assert!(header_comment.contains("digest="));
    assert_eq!(lines.next().unwrap(), "param,value,certified,optimum_params_hash,error");
    assert_eq!(lines.count(), 3);
}

#[test]
fn sweep_reduction_instance_matches_renyi() {
    // N = Tr instance: the sweep column equals D_α + log Tr σ.
    let inst_path = tmp("sweep-red.json");
    let inst = swivel_core::states::random_instance(3, 3, 3, 2, 11).unwrap();
    // Rebuild with the trace channel.
    let tr = swivel_core::states::Instance::new(
        inst.rho().clone(),
        inst.sigma().clone(),
        swivel_core::states::QuantumChannel::trace_channel(3),
        Some(11),
    )
    .unwrap();
    let file = swivel_core::states::InstanceFile::from_instance(
        &tr,
        vec![3],
        Default::default(),
    );
    std::fs::write(&inst_path, file.to_json().unwrap()).unwrap();

    let out = tmp("sweep-red.csv");
    assert!(bin()
        .args(["sweep", "--quantity", "delta-prime", "--grid", "0.5,2.0", "--instance"])
        .arg(&inst_path)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let log_tr = tr.sigma().op().trace_re().ln();
    for (line, alpha) in text.lines().skip(2).zip([0.5f64, 2.0]) {
        let value: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        let expect =
            swivel_core::entropy::renyi_rel(tr.rho(), tr.sigma(), alpha).unwrap() + log_tr;
        assert!((value - expect).abs() < 1e-8, "alpha {alpha}: {value} vs {expect}");
    }
}

#[test]
fn verify_parallel_matches_serial() {
    let out1 = tmp("verify-serial.json");
    let out2 = tmp("verify-parallel.json");
    for (out, jobs) in [(&out1, "1"), (&out2, "3")] {
        let status = bin()
            .args(["verify", "reduction", "--trials", "6", "--seed", "21", "--jobs", jobs, "-o"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let mut a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out1).unwrap()).unwrap();
    let mut b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out2).unwrap()).unwrap();
    // Identical except wall time.
    a["report"]["wall_time_s"] = 0.0.into();
    b["report"]["wall_time_s"] = 0.0.into();
    assert_eq!(a, b);
}

#[test]
fn verify_unknown_claim_exits_two() {
    let status = bin().args(["verify", "unknown-claim"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn list_claims_covers_registry() {
    let output = bin().arg("list-claims").output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    for id in [
        "thm-monotone",
        "thm-monotone-tilde",
        "reduction",
        "prop-lim-a-1",
        "non-negativity",
        "cor-recover",
        "thm-rel-ent-other",
        "cmi-suite",
        "prop-zhang",
        "appendix-a",
        "appendix-c",
        "oracle-equivalence",
        "combos",
    ] {
        assert!(text.contains(id), "missing claim {id}");
    }
}

#[test]
fn seed_env_fallback() {
    let a = tmp("env-a.json");
    let b = tmp("env-b.json");
    assert!(bin()
        .args(["gen", "--dims", "2", "--kraus", "2", "-o"])
        .arg(&a)
        .env("SWIVEL_SEED", "77")
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["gen", "--dims", "2", "--kraus", "2", "--seed", "77", "-o"])
        .arg(&b)
        .status()
        .unwrap()
        .success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn sweep_rejects_degenerate_alpha_grid() {
    let inst = tmp("guard-inst.json");
    assert!(bin()
        .args(["gen", "--dims", "2", "--kraus", "2", "--seed", "5", "-o"])
        .arg(&inst)
        .status()
        .unwrap()
        .success());
    let out = tmp("guard.csv");
    let status = bin()
        .args(["sweep", "--quantity", "delta-prime", "--grid", "0.5,1.0,1.5", "--instance"])
        .arg(&inst)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn sweep_writes_nan_rows_with_error_column() {
    let inst = tmp("nan-inst.json");
    assert!(bin()
        .args(["gen", "--dims", "2", "--kraus", "2", "--seed", "5", "-o"])
        .arg(&inst)
        .status()
        .unwrap()
        .success());
    let out = tmp("nan.csv");
    // 2.5 is outside the Δ′ range: the row records the failure instead of
    // aborting the sweep.
    assert!(bin()
        .args(["sweep", "--quantity", "delta-prime", "--grid", "0.5,2.5", "--instance"])
        .arg(&inst)
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let nan_row = text.lines().find(|l| l.starts_with("2.5,")).unwrap();
    assert!(nan_row.starts_with("2.5,nan,false,,"), "row: {nan_row}");
    assert!(nan_row.contains("alpha"));
}

#[test]
fn verify_violation_exits_one() {
    // An absurd tolerance turns the tiny numerical residue into a failure.
    let status = bin()
        .args(["verify", "reduction", "--trials", "2", "--seed", "3", "--tolerance", "1e-30"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
