//! End-to-end tests of the qkdsim binary: output formats, determinism,
//! config layering, and failure diagnostics.

use std::process::{Command, Output};

fn qkdsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkdsim"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}, stderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Extracts the numeric value of a `key=value` token from one-line output.
fn field(text: &str, key: &str) -> f64 {
    let marker = format!("{key}=");
    let start = text.find(&marker).unwrap_or_else(|| panic!("no {marker} in: {text}"))
        + marker.len();
    let rest = &text[start..];
    let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
    rest[..end].parse().unwrap_or_else(|e| panic!("bad number in {marker}{rest}: {e}"))
}

#[test]
fn rate_point_matches_frozen_reference_and_is_deterministic() {
    let args =
        ["rate", "--protocol", "bb84", "--source", "wcp", "--distance", "50", "--mu", "0.48"];
    let first = stdout_of(&qkdsim(&args));
    let second = stdout_of(&qkdsim(&args));
    assert_eq!(first, second);
    assert!(first.starts_with("protocol=bb84 source=wcp distance_km=50"), "{first}");
    let rate = field(&first, "rate");
    let reference = 2.226025559064291931717e-4;
    assert!(
        ((rate - reference) / reference).abs() < 1e-12,
        "rate {rate} vs reference {reference}"
    );
    let q_mu = field(&first, "q_mu");
    let q_reference = 9.624734682212942891146e-4;
    assert!(((q_mu - q_reference) / q_reference).abs() < 1e-12);
}

#[test]
fn sweep_file_and_stdout_agree_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.csv");
    let path_b = dir.path().join("b.csv");
    let base = [
        "sweep", "--protocols", "bb84", "--sources", "wcp,hpcs", "--l-min", "0", "--l-max", "20",
        "--step", "10",
    ];
    let mut with_a = base.to_vec();
    with_a.extend(["--out", path_a.to_str().unwrap()]);
    let mut with_b = base.to_vec();
    with_b.extend(["--out", path_b.to_str().unwrap()]);

    let note = stdout_of(&qkdsim(&with_a));
    assert!(note.contains("wrote 6 rows"), "{note}");
    stdout_of(&qkdsim(&with_b));
    let streamed = stdout_of(&qkdsim(&base));

    let file_a = std::fs::read_to_string(&path_a).unwrap();
    let file_b = std::fs::read_to_string(&path_b).unwrap();
    assert_eq!(file_a, file_b);
    assert_eq!(file_a, streamed);
    assert!(file_a.starts_with("distance_km,protocol,source,mu_opt,q_mu,e_mu,rate\n"), "{file_a}");
    assert_eq!(file_a.lines().count(), 7);
}

#[test]
fn dedicated_flags_beat_set_pairs_beat_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "alpha = 0.5\n").unwrap();
    let conf = conf.to_str().unwrap();
    let probe = ["rate", "--protocol", "bb84", "--source", "wcp", "--distance", "50", "--mu", "0.48"];
    let run = |extra: &[&str]| {
        let mut args = probe.to_vec();
        args.extend(extra);
        stdout_of(&qkdsim(&args))
    };

    // File alone applies.
    assert_eq!(run(&["--config", conf]), run(&["--alpha", "0.5"]));
    // --set overrides the file.
    assert_eq!(run(&["--config", conf, "--set", "alpha=0.3"]), run(&["--alpha", "0.3"]));
    // The dedicated flag overrides both.
    assert_eq!(run(&["--config", conf, "--set", "alpha=0.3", "--alpha", "0.21"]), run(&[]));
}

#[test]
fn threshold_output_well_formed() {
    let out = stdout_of(&qkdsim(&["threshold", "--protocol", "bb84", "--source", "wcp"]));
    assert!(out.starts_with("protocol=bb84 source=wcp threshold_km="), "{out}");
    let km = field(&out, "threshold_km");
    assert!((130.0..150.0).contains(&km), "threshold {km} km out of expected band");
}

#[test]
fn crossover_of_a_source_with_itself_is_none() {
    let out = stdout_of(&qkdsim(&[
        "crossover", "--protocol", "bb84", "--source-a", "wcp", "--source-b", "wcp",
    ]));
    assert_eq!(out.trim(), "protocol=bb84 source_a=wcp source_b=wcp crossover=none");
}

#[test]
fn bounds_single_point_arbitrates_between_variants() {
    let point =
        ["bounds", "--distance", "50", "--mu", "0.6", "--nu1", "0.25", "--nu2", "0.12"];
    let derived = stdout_of(&qkdsim(&point));
    assert!(derived.contains("variant=derived"), "{derived}");
    assert!(derived.contains("all_sound=true"), "{derived}");
    for name in ["y1_lower", "e1_upper", "y2_lower", "e2_upper"] {
        assert!(derived.contains(&format!("{name}: bound=")), "{derived}");
    }

    let mut args = point.to_vec();
    args.extend(["--variant", "literature"]);
    let literature = stdout_of(&qkdsim(&args));
    assert!(literature.contains("variant=literature"), "{literature}");
    assert!(literature.contains("all_sound=false"), "{literature}");
    assert!(literature.contains("sound=false"), "{literature}");
}

#[test]
fn bounds_campaign_counts_violations_per_variant() {
    let derived = stdout_of(&qkdsim(&["bounds", "--draws", "300", "--seed", "7"]));
    let first = derived.lines().next().unwrap();
    assert!(first.starts_with("variant=derived draws=300 violations=0"), "{derived}");

    let literature = stdout_of(&qkdsim(&[
        "bounds", "--draws", "300", "--seed", "7", "--variant", "literature",
    ]));
    assert!(literature.contains("variant=literature"), "{literature}");
    assert!(field(literature.lines().next().unwrap(), "violations") > 0.0, "{literature}");
}

#[test]
fn gain_output_well_formed() {
    let out = stdout_of(&qkdsim(&["gain", "--protocol", "sarg"]));
    assert!(
        out.starts_with("protocol=sarg numerator=hpcs baselines=wcp,hsps average_gain="),
        "{out}"
    );
    let gain = field(&out, "average_gain");
    assert!((2.0..5.0).contains(&gain), "gain {gain} out of expected band");
    assert!(field(&out, "samples") > 10.0, "{out}");
}

#[test]
fn failures_exit_nonzero_with_one_line_diagnostic() {
    let cases: [&[&str]; 4] = [
        &["rate", "--protocol", "bb84", "--source", "wcp", "--distance", "-5"],
        &["rate", "--protocol", "bb84", "--source", "wcp", "--distance", "10", "--set", "garbage"],
        &["rate", "--protocol", "bb84", "--source", "wcp", "--distance", "10", "--set", "nope=1"],
        &["threshold", "--protocol", "bb84", "--source", "wcp", "--config", "/no/such/file.conf"],
    ];
    for args in cases {
        let out = qkdsim(args);
        assert!(!out.status.success(), "expected failure for {args:?}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.starts_with("error: "), "stderr for {args:?}: {stderr}");
    }
    let missing = qkdsim(&[
        "threshold", "--protocol", "bb84", "--source", "wcp", "--config", "/no/such/file.conf",
    ]);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/no/such/file.conf"));
}
