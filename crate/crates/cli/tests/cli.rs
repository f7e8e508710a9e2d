use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const BIN: &str = env!("CARGO_BIN_EXE_mres");

fn mres(args: &[&str], stdin: &[u8]) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mres");
    child.stdin.take().unwrap().write_all(stdin).unwrap();
    child.wait_with_output().unwrap()
}

fn ok(args: &[&str], stdin: &[u8]) -> Vec<u8> {
    let out = mres(args, stdin);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn kv(out: &[u8], key: &str) -> Option<String> {
    String::from_utf8_lossy(out)
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('=').map(str::to_string))
}

#[test]
fn prove_then_check_regular() {
    let proof = ok(&["prove", "kbkf-lq-weak", "5"], b"");
    let out = ok(&["check", "--mode", "plain", "--regular"], &proof);
    assert_eq!(kv(&out, "steps").as_deref(), Some("41"));
    assert_eq!(kv(&out, "refutation").as_deref(), Some("true"));
}

#[test]
fn prove_refuses_families_without_upper_bound() {
    for fam in ["kbkf-lq", "qparity", "lqparity", "quparity", "heq2"] {
        let out = mres(&["prove", fam, "5"], b"");
        assert_eq!(out.status.code(), Some(2), "{fam}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("lower bound"), "{fam}");
    }
    let proof = ok(&["prove", "kbkf-lq", "5", "--mode", "we"], b"");
    ok(&["check", "--mode", "we"], &proof);
}

#[test]
fn check_failure_names_step_and_property() {
    let proof = ok(&["prove", "kbkf-lq", "3", "--mode", "we"], b"");
    let out = mres(&["check", "--mode", "plain", "--format", "stats-kv"], &proof);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(kv(&out.stdout, "failed_property").as_deref(), Some("rule-set"));
    let step: usize = kv(&out.stdout, "failed_step").unwrap().parse().unwrap();
    let text = String::from_utf8(proof).unwrap();
    let first_we = text.lines().filter(|l| l.starts_with(['A', 'R', 'W'])).position(|l| l.starts_with("WE "));
    assert_eq!(Some(step - 1), first_we);
}

#[test]
fn mismatched_formula_is_rejected() {
    let proof = ok(&["prove", "eq2", "2"], b"");
    let dir = scratch("mismatch");
    let formula = dir.join("f.qdimacs");
    ok(&["gen", "eq2", "3", "-o", formula.to_str().unwrap()], b"");
    for cmd in ["check", "invariant", "verify-strategy"] {
        let out = mres(&[cmd, "-f", formula.to_str().unwrap()], &proof);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert_eq!(kv(&out.stdout, "failed_property").as_deref(), Some("formula-hash"), "{cmd}");
    }
}

#[test]
fn restriction_matches_generated_family() {
    for n in ["1", "2", "4"] {
        let split = ok(&["gen", "kbkf-lq-split", n], b"");
        let restricted = ok(&["restrict", "-", "t=0", "--normalize"], &split);
        let by_index = ok(&["restrict", "-", "1=0", "--normalize"], &split);
        let direct = ok(&["gen", "kbkf-lq", n, "--normalize"], b"");
        assert_eq!(restricted, direct);
        assert_eq!(by_index, direct);
    }
}

#[test]
fn outputs_are_deterministic() {
    let cases: &[&[&str]] = &[
        &["gen", "heq2", "3", "--partition", "default"],
        &["gen", "mparity", "3"],
        &["prove", "mparity", "3"],
        &["prove", "heq2", "3", "--mode", "wf"],
        &["prove", "example", "1"],
    ];
    for args in cases {
        assert_eq!(ok(args, b""), ok(args, b""), "{args:?}");
    }
    let proof = ok(&["prove", "mparity", "2"], b"");
    assert_eq!(ok(&["export-circuit"], &proof), ok(&["export-circuit"], &proof));
}

#[test]
fn exhaustive_commands_respect_budget() {
    let big = ok(&["gen", "mparity", "5"], b"");
    assert_eq!(mres(&["oracle"], &big).status.code(), Some(2));
    let out = ok(&["oracle", "--max-vars", "4"], &ok(&["gen", "example", "1"], b""));
    assert_eq!(kv(&out, "value").as_deref(), Some("false"));
    let proof = ok(&["prove", "eq2", "3"], b"");
    assert_eq!(mres(&["invariant", "--max-vars", "2"], &proof).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mres(&["gen", "nosuch", "3"], b"").status.code(), Some(2));
    assert_eq!(mres(&["check"], b"not a proof").status.code(), Some(2));
    assert_eq!(mres(&["check", "/nonexistent/proof"], b"").status.code(), Some(2));
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mres-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Commands in the README's `sh` blocks, in order. A trailing `# exit N`
/// gives the expected status; everything else must exit 0.
fn readme_commands() -> Vec<(String, i32)> {
    let readme = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    let text = std::fs::read_to_string(readme).unwrap();
    let mut out = Vec::new();
    let mut in_sh = false;
    for line in text.lines() {
        if line.starts_with("```") {
            in_sh = line.trim() == "```sh";
            continue;
        }
        let line = line.trim();
        if !in_sh || !line.starts_with("mres ") {
            continue;
        }
        match line.split_once("# exit ") {
            Some((cmd, code)) => out.push((cmd.trim().to_string(), code.trim().parse().unwrap())),
            None => out.push((line.to_string(), 0)),
        }
    }
    out
}

#[test]
fn readme_pipelines_run() {
    let commands = readme_commands();
    assert!(commands.len() >= 10, "README lists {} commands", commands.len());
    let dir = scratch("readme");
    let bin_dir = Path::new(BIN).parent().unwrap();
    let path = format!("{}:{}", bin_dir.display(), std::env::var("PATH").unwrap_or_default());
    for (cmd, expected) in commands {
        let out = Command::new("bash")
            .args(["-o", "pipefail", "-c", &cmd])
            .current_dir(&dir)
            .env("PATH", &path)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(expected),
            "{cmd}\n{}{}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
