//! Disturb a plant and look for the variable that refuses to move.

use faithless::experiments::{scenario, DEFAULT_SEED};
use faithless::tcv::{run_tcv, TcvOptions};

fn main() -> faithless::Result<()> {
    let opts = TcvOptions::new("D", &["P", "O"]);
    for name in ["example1", "passive", "open_loop", "example5_1"] {
        let report = run_tcv(&scenario(name, DEFAULT_SEED)?, &opts)?;
        println!("== {name}\n{}", report.verdict());
    }
    Ok(())
}
