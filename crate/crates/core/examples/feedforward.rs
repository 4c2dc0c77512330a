//! Open-loop cancellation of a measured disturbance drifts with any bias
//! in the measurement; feedback does not.

use faithless::experiments::{feedforward_comparison, DEFAULT_SEED};

fn main() -> faithless::Result<()> {
    let f = feedforward_comparison(DEFAULT_SEED)?;
    println!("bias {} over {} s: P ends at {:.3} (expected {:.3})", f.bias, f.duration, f.final_p, f.expected_final_p);
    println!("rejection ratio: feedback {:.1}, feedforward {:.2}", f.feedback_ratio, f.feedforward_ratio);
    Ok(())
}
