//! Drive the laboratory from a scenario document instead of code: parse,
//! validate, execute, and read back the outputs. The same document format
//! is what the `bornlab` binary consumes.
//!
//! ```bash
//! cargo run --release --example scenario_files
//! ```

use bornlab::scenario::{emit_scenario, execute, parse_scenario, Overrides};

const DOCUMENT: &str = r#"
version = 1
name = "document-demo"
mode = "ensemble"
hilbert_dim = 2
sigma = 1.0
t_max = 60.0
epsilon = 0.001
trajectories = 200
seed = 14
hamiltonian = { diagonal = [0.0, 1.0] }
collapse_ops = ["hamiltonian"]
initial_state = { amplitudes = [[0.5477225575051661, 0.0], [0.8366600265340756, 0.0]] }
"#;

fn main() {
    let scenario = parse_scenario(DOCUMENT).expect("document is valid");
    println!(
        "parsed \"{}\": mode {:?}, {} trajectories, defaults dt = {}, stride auto",
        scenario.name, scenario.mode, scenario.trajectories, scenario.dt
    );

    // documents round-trip bit-exactly
    let reparsed = parse_scenario(&emit_scenario(&scenario)).unwrap();
    assert_eq!(scenario, reparsed);
    println!("emit -> parse round-trip: identical\n");

    let dir = std::env::temp_dir().join("bornlab-scenario-demo");
    let overrides = Overrides {
        output: Some(dir.join("demo").to_string_lossy().into_owned()),
        ..Default::default()
    };
    let report = execute(&scenario, &overrides).expect("scenario runs");
    for line in &report.lines {
        println!("{line}");
    }
    for file in &report.files {
        println!("wrote {}", file.display());
    }

    // a malformed document reports every violation at once
    let broken = DOCUMENT
        .replace("sigma = 1.0", "sigma = -3.0")
        .replace("epsilon = 0.001", "epsilon = 2.0");
    match parse_scenario(&broken) {
        Err(err) => println!("\nbroken document rejected:\n{err}"),
        Ok(_) => unreachable!(),
    }
}
