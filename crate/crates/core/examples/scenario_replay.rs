//! Replays a scenario file through the command-line front end.

use std::io;

use eventb_core::cli;

const SCENARIO: &str = "\
# Literal add_content breaks the functional shape of chatcontent.
machine m0
users 2
option add_content=literal
add_user A
add_content c1
expect invariant-violation inv4
";

fn main() {
    let path = std::env::temp_dir().join("eventb-scenario-replay.txt");
    std::fs::write(&path, SCENARIO).unwrap();
    let status = cli::run(
        ["eventb", "run", path.to_str().unwrap()],
        &mut io::stdout(),
        &mut io::stderr(),
    );
    println!("exit status: {status:?} ({})", status.code());
}
