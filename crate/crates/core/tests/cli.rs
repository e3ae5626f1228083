//! End-to-end runs of the `rram-bnn` binary.

mod common;

use std::path::Path;
use std::process::Command;

const SMALL: &str = r#"
[train]
hidden = [50]
epochs = 1
train_limit = 1000
test_limit = 200

[sweep]
n_trials = 2
test_limit = 300
bers = [0.0, 0.01]
n_mc = 20000
ecc_words = 20000
ecc_bers = [0.0, 0.001, 0.01]
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rram-bnn"));
    c.env_remove("MNIST_DIR").env("RUST_LOG", "warn");
    c
}

fn run_ok(cmd: &mut Command) {
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{cmd:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn have_mnist() -> bool {
    common::mnist_dir().join("t10k-labels-idx1-ubyte").exists()
}

#[test]
fn missing_mnist_dir_is_a_usage_error() {
    let out = bin().args(["train", "--model-out", "/tmp/never.bnn"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mnist-dir"));
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[sweep]\nno_such_key = 1\n").unwrap();
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "ecc-curve", "--out"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
    assert!(!dir.path().join("x.csv").exists());
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

/// Every subcommand, twice, into separate directories; outputs must match
/// byte for byte and carry the seed and config hash.
#[test]
fn subcommands_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    let mnist = have_mnist();
    if !mnist {
        eprintln!("MNIST unavailable; only the device and ECC subcommands are exercised");
    }
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let d = dir.path().join(run);
        let base = || {
            let mut c = bin();
            c.arg("--config").arg(&cfg);
            c
        };
        run_ok(base().arg("ecc-curve").arg("--out").arg(d.join("ecc.csv")));
        run_ok(base().args(["--seed", "9", "ber-curves", "--out"]).arg(d.join("ber.csv")));
        let mut files = vec!["ecc.csv", "ber.csv"];
        if mnist {
            let m = common::mnist_dir();
            run_ok(
                base()
                    .arg("train")
                    .arg("--mnist-dir")
                    .arg(&m)
                    .arg("--model-out")
                    .arg(d.join("model.bnn"))
                    .arg("--log-out")
                    .arg(d.join("train.csv")),
            );
            for (sub, out) in [("sweep-ber", "sweep.csv"), ("energy-tradeoff", "energy.csv")] {
                run_ok(
                    base()
                        .arg(sub)
                        .arg("--mnist-dir")
                        .arg(&m)
                        .arg("--model")
                        .arg(d.join("model.bnn"))
                        .arg("--out")
                        .arg(d.join(out)),
                );
            }
            files.extend(["train.csv", "sweep.csv", "energy.csv"]);
            outputs.push(std::fs::read(d.join("model.bnn")).unwrap());
        }
        for f in files {
            outputs.push(read(&d.join(f)).into_bytes());
        }
    }
    let half = outputs.len() / 2;
    for i in 0..half {
        assert_eq!(outputs[i], outputs[half + i], "output {i} differs between runs");
    }

    let ecc = read(&dir.path().join("a/ecc.csv"));
    let first = ecc.lines().next().unwrap();
    assert!(first.starts_with("# tool=rram-bnn "), "{first}");
    assert!(first.contains("seed=42"));
    assert!(first.contains("config_hash="));
    assert_eq!(ecc.lines().nth(1), Some("input_ber,output_ber,ci_halfwidth,n_words"));
    assert_eq!(ecc.lines().count(), 2 + 3);

    let ber = read(&dir.path().join("a/ber.csv"));
    assert!(ber.lines().next().unwrap().contains("seed=9"));
    assert_eq!(ber.lines().count(), 2 + 7);

    if mnist {
        let sweep = read(&dir.path().join("a/sweep.csv"));
        assert_eq!(sweep.lines().count(), 2 + 2);
        assert!(sweep.lines().nth(1).unwrap().starts_with("experiment_id,weight_ber,accuracy_mean"));
        let train = read(&dir.path().join("a/train.csv"));
        assert!(train.lines().next().unwrap().contains("seed=1 "));
    }
}

#[test]
fn seed_override_changes_monte_carlo_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    for seed in ["1", "2"] {
        run_ok(bin().arg("--config").arg(&cfg).args(["--seed", seed, "ecc-curve", "--out"]).arg(dir.path().join(format!("{seed}.csv"))));
    }
    let body = |s: &str| read(&dir.path().join(s)).lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_ne!(body("1.csv"), body("2.csv"));
}
