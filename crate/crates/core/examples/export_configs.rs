//! Writes every built-in scenario as a JSON config.
//!
//! `cargo run --example export_configs -- [dir]`

use std::path::PathBuf;

use faithless::experiments::{scenario, DEFAULT_SEED, SCENARIOS};

fn main() -> faithless::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "configs".into()));
    std::fs::create_dir_all(&dir)?;
    for name in SCENARIOS {
        let spec = scenario(name, DEFAULT_SEED)?;
        std::fs::write(dir.join(format!("{name}.json")), spec.to_json() + "\n")?;
        println!("{name}");
    }
    Ok(())
}
