use std::path::Path;

use blackwell::cli::{execute, main_with_args, Cli, Outcome};
use clap::Parser;
use serde_json::Value;

fn run(out: &Path, args: &[&str]) -> i32 {
    let mut all = vec!["blackwell", "--out", out.to_str().unwrap()];
    all.extend_from_slice(args);
    main_with_args(all)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_builtins() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(dir.path(), &["classify", "--scenario", "appendixA-S1"]),
        0
    );
    let doc = json(&dir.path().join("classify_appendixA-S1.json"));
    assert_eq!(doc["verdict"], "Avoidable");
    assert_eq!(doc["decomposition"]["classification"]["empty"]["n"], 5);
    assert_eq!(
        run(
            dir.path(),
            &["classify", "--scenario", "pure-pennies-halfline"]
        ),
        0
    );
    let doc = json(&dir.path().join("classify_pure-pennies-halfline.json"));
    assert_eq!(doc["verdict"], "Undecided");
    assert!((doc["minimax_gap"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(
        run(
            dir.path(),
            &["classify", "--scenario", "lx-minimal-forcible"]
        ),
        0
    );
    assert_eq!(
        json(&dir.path().join("classify_lx-minimal-forcible.json"))["verdict"],
        "Approachable"
    );
}

#[test]
fn approach_simulation_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "approach",
        "--scenario",
        "appendixA-S0",
        "--epsilon",
        "0.1",
        "--rounds",
        "600",
    ];
    assert_eq!(run(dir.path(), &args), 0);
    let csv_path = dir.path().join("approach_appendixA-S0.csv");
    let first = std::fs::read(&csv_path).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert!(text.starts_with("t,phi_0,phi_1,dist,tau_t,example_found,slack\n"));
    assert_eq!(text.lines().count(), 601);
    assert_eq!(run(dir.path(), &args), 0);
    assert_eq!(std::fs::read(&csv_path).unwrap(), first);

    let random = [
        "simulate",
        "approach",
        "--scenario",
        "appendixA-S0",
        "--rounds",
        "400",
        "--adversary",
        "random",
    ];
    assert_eq!(
        run(dir.path(), &[&random[..], &["--seed", "9"]].concat()),
        0
    );
    let a = std::fs::read(&csv_path).unwrap();
    assert_eq!(
        run(dir.path(), &[&random[..], &["--seed", "9"]].concat()),
        0
    );
    assert_eq!(std::fs::read(&csv_path).unwrap(), a);
}

#[test]
fn failed_rate_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        dir.path(),
        &[
            "simulate",
            "approach",
            "--scenario",
            "appendixA-S1",
            "--rounds",
            "400",
        ],
    );
    assert_eq!(code, 2);
}

#[test]
fn script_adversary_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("y.json");
    std::fs::write(&script, r#"[{"pure":1},{"mixed":[0.5,0.5]}]"#).unwrap();
    let spec = format!("script:{}", script.display());
    let args = [
        "simulate",
        "approach",
        "--scenario",
        "appendixA-S0",
        "--rounds",
        "400",
        "--adversary",
        &spec,
    ];
    assert_eq!(run(dir.path(), &args), 0);
    std::fs::write(&script, r#"[{"pure":7}]"#).unwrap();
    assert_eq!(run(dir.path(), &args), 1);
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"name\": \"x\", ").unwrap();
    assert_eq!(
        run(
            dir.path(),
            &["classify", "--scenario", bad.to_str().unwrap()]
        ),
        1
    );
    assert_eq!(
        run(dir.path(), &["classify", "--scenario", "no-such-scenario"]),
        1
    );
    assert_eq!(run(dir.path(), &["frobnicate"]), 1);
    assert_eq!(
        run(
            dir.path(),
            &[
                "simulate",
                "approach",
                "--scenario",
                "appendixA-S0",
                "--epsilon",
                "0"
            ]
        ),
        1
    );
}

#[test]
fn scenario_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let Outcome::Text(text) = execute(Cli::parse_from([
        "blackwell",
        "scenario",
        "show",
        "appendixA-S2",
    ]))
    .unwrap() else {
        panic!("expected text");
    };
    let path = dir.path().join("s2.json");
    std::fs::write(&path, &text).unwrap();
    let (loaded, _) = blackwell::cli::load_scenario(path.to_str().unwrap()).unwrap();
    assert_eq!(loaded, blackwell::cli::builtin("appendixA-S2").unwrap());
    assert_eq!(
        run(
            dir.path(),
            &["classify", "--scenario", path.to_str().unwrap()]
        ),
        0
    );
    assert_eq!(
        json(&dir.path().join("classify_appendixA-S2.json"))["verdict"],
        "Approachable"
    );
}

#[test]
fn peel_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["peel", "--scenario", "appendixA-S1"]), 0);
    let doc = json(&dir.path().join("peel_appendixA-S1.json"));
    let stages = doc["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 5);
    let removed: Vec<u64> = stages
        .iter()
        .map(|s| s["removed"].as_u64().unwrap())
        .collect();
    assert_eq!(removed, vec![0, 0, 2, 2, 2]);
    let cert = &stages[2]["certificates"][0];
    for key in ["psi", "lambda", "c", "tau", "value"] {
        assert!(!cert[key].is_null(), "missing {key}");
    }
    assert_eq!(doc["horizon"], 326_402);
    let csv = std::fs::read_to_string(dir.path().join("peel_appendixA-S1_hausdorff.csv")).unwrap();
    assert!(csv.starts_with("stage,hausdorff\n"));
    assert_eq!(csv.lines().count(), 5);
    // With one stage the residual tolerance is 1/2, and no S₁ counterexample has that much slack.
    assert_eq!(
        run(
            dir.path(),
            &["peel", "--scenario", "appendixA-S1", "--stages", "1"]
        ),
        0
    );
    let doc = json(&dir.path().join("peel_appendixA-S1.json"));
    assert_eq!(doc["classification"]["a_set_approx"]["residual_tau"], 0.5);
}

#[test]
fn force_lp_and_game_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(
        run(
            out,
            &[
                "force",
                "check",
                "--scenario",
                "appendixA-S0",
                "--halfspace",
                "1,1,1",
                "--order",
                "1"
            ]
        ),
        0
    );
    let doc = json(&out.join("force_appendixA-S0_x1.json"));
    assert_eq!(doc["forces"], true);
    assert_eq!(
        run(
            out,
            &[
                "force",
                "check",
                "--scenario",
                "pure-pennies-halfline",
                "--halfspace",
                "1,0",
                "--order",
                "2"
            ]
        ),
        0
    );
    assert_eq!(
        json(&out.join("force_pure-pennies-halfline_x2.json"))["forces"],
        true
    );
    assert_eq!(
        run(
            out,
            &[
                "force",
                "check",
                "--scenario",
                "pure-pennies-halfline",
                "--halfspace",
                "1,0",
                "--order",
                "1"
            ]
        ),
        0
    );
    assert_eq!(
        json(&out.join("force_pure-pennies-halfline_x1.json"))["forces"],
        false
    );
    assert_eq!(
        run(
            out,
            &[
                "force",
                "check",
                "--scenario",
                "lx-minimal-forcible",
                "--set",
                "Lx",
                "--order",
                "1"
            ]
        ),
        1,
        "set forcing needs a pure game"
    );

    let lp = out.join("box.json");
    std::fs::write(
        &lp,
        r#"{"objective":[1,1],"rows":[[1,0],[0,1]],"senses":["le","le"],"rhs":[1,1],"maximize":true}"#,
    )
    .unwrap();
    assert_eq!(run(out, &["lp", "solve", lp.to_str().unwrap()]), 0);
    assert!((json(&out.join("lp_box.json"))["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let m = out.join("pennies.json");
    std::fs::write(&m, "[[1,-1],[-1,1]]").unwrap();
    assert_eq!(run(out, &["game", "value", m.to_str().unwrap()]), 0);
    assert!(
        json(&out.join("game_pennies.json"))["value"]
            .as_f64()
            .unwrap()
            .abs()
            < 1e-9
    );
    assert_eq!(
        run(
            out,
            &[
                "game",
                "value",
                "--scenario",
                "appendixA-S0",
                "--lambda",
                "1,1"
            ]
        ),
        0
    );
    assert!(
        (json(&out.join("game_appendixA-S0.json"))["value"]
            .as_f64()
            .unwrap()
            - 0.5)
            .abs()
            < 1e-9
    );
}

#[test]
fn stochastic_commands() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "stochastic",
        "run",
        "--scenario",
        "appendixA-S0",
        "--rounds",
        "60",
        "--seeds",
        "0..4",
    ];
    assert_eq!(run(dir.path(), &args), 0);
    let path = dir.path().join("stochastic_appendixA-S0.csv");
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.starts_with("run,t,emp_0,emp_1,exp_0,exp_1,emp_dev\n"));
    assert_eq!(first.lines().count(), 1 + 4 * 60);
    assert_eq!(run(dir.path(), &args), 0);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    let Outcome::Text(h) =
        execute(Cli::parse_from(["blackwell", "stochastic", "horizon"])).unwrap()
    else {
        panic!("expected text");
    };
    assert_eq!(h, "450");
    assert_eq!(
        run(
            dir.path(),
            &[
                "stochastic",
                "run",
                "--scenario",
                "appendixA-S0",
                "--seeds",
                "5..5"
            ]
        ),
        1
    );
}

#[test]
fn scenario_list_names_builtins() {
    let Outcome::Text(t) = execute(Cli::parse_from(["blackwell", "scenario", "list"])).unwrap()
    else {
        panic!("expected text");
    };
    assert_eq!(t.lines().count(), 5);
    assert!(t.contains("appendixA-S1"));
}
