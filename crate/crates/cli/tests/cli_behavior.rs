//! CLI behavior: report determinism over the corpus, parse round trips,
//! and process exit codes.

use std::path::PathBuf;
use std::process::Command;

use ktc_cli::{parse_document, run_command, CommandKind, Options, ReportFormat};

fn corpus_files() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "ktc"))
        .collect();
    files.sort();
    assert!(!files.is_empty(), "corpus must not be empty");
    files
}

const ALL_COMMANDS: [CommandKind; 14] = [
    CommandKind::CheckCategory,
    CommandKind::CheckExact,
    CommandKind::CheckWaldhausen,
    CommandKind::SConstruct,
    CommandKind::Nerve,
    CommandKind::K0,
    CommandKind::Cohomology,
    CommandKind::Potential,
    CommandKind::Refine,
    CommandKind::TheoremCheck,
    CommandKind::GftRoundtrip,
    CommandKind::BranesClassify,
    CommandKind::TwistClass,
    CommandKind::Pndp,
];

#[test]
fn corpus_parses_and_round_trips() {
    for f in corpus_files() {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = parse_document(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let canon = doc.canonical_text();
        let doc2 = parse_document(&canon).unwrap();
        assert_eq!(canon, doc2.canonical_text(), "round trip of {}", f.display());
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let opts = Options::default();
    for f in corpus_files() {
        let text = std::fs::read_to_string(&f).unwrap();
        let doc = parse_document(&text).unwrap();
        for cmd in ALL_COMMANDS {
            let first = run_command(cmd, &opts, &doc);
            let second = run_command(cmd, &opts, &doc);
            match (first, second) {
                (Ok(a), Ok(b)) => {
                    assert_eq!(
                        a.render(ReportFormat::Machine),
                        b.render(ReportFormat::Machine),
                        "machine report of {} on {}",
                        cmd.name(),
                        f.display()
                    );
                    assert_eq!(
                        a.render(ReportFormat::Human),
                        b.render(ReportFormat::Human),
                        "human report of {} on {}",
                        cmd.name(),
                        f.display()
                    );
                }
                (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
                _ => panic!("nondeterministic outcome of {} on {}", cmd.name(), f.display()),
            }
        }
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ktc"))
}

fn corpus_path(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(name)
        .display()
        .to_string()
}

#[test]
fn exit_status_zero_on_all_pass() {
    let out = bin()
        .args(["k0", "--input", &corpus_path("exact_f2.ktc")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("free rank 1, no torsion"), "{stdout}");
}

#[test]
fn exit_status_one_on_check_failure() {
    let out = bin()
        .args(["theorem-check", "--input", &corpus_path("theorem_fail.ktc")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[FAIL] H1"), "{stdout}");
}

#[test]
fn exit_status_two_on_parse_error() {
    let dir = tempdir();
    let bad = dir.join("bad.ktc");
    std::fs::write(&bad, "begin widget W\nend\n").unwrap();
    let out = bin()
        .args(["check-category", "--input", &bad.display().to_string()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("line 1"), "{stderr}");
}

#[test]
fn exit_status_two_on_unknown_subcommand() {
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn machine_format_is_line_structured() {
    let out = bin()
        .args([
            "branes-classify",
            "--input",
            &corpus_path("branes.ktc"),
            "--format",
            "machine",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("command branes-classify"));
    for line in lines {
        assert!(line.starts_with("record "), "unexpected line {line}");
        let mut parts = line.splitn(4, ' ');
        assert_eq!(parts.next(), Some("record"));
        let _name = parts.next().unwrap();
        let status = parts.next().unwrap();
        assert!(status == "PASS" || status == "FAIL");
    }
    assert!(stdout.contains("record cfg.gauge-group PASS U(2) x U(1)"));
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ktc-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
