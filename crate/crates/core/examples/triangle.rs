//! Conditional correlations of the varying-reference loop, noiseless and
//! with 10% measurement noise regularising the undefined entries.

use faithless::causal::triangle_faithfulness_tables;
use faithless::experiments::{scenario, DEFAULT_SEED};
use faithless::plant::simulate;

fn main() -> faithless::Result<()> {
    let trace = simulate(&scenario("example2", DEFAULT_SEED)?)?;
    println!("noiseless\n{}", triangle_faithfulness_tables(&trace, 0.0, 0)?.to_text());
    println!("10% measurement noise\n{}", triangle_faithfulness_tables(&trace, 0.1, 1)?.to_text());
    Ok(())
}
