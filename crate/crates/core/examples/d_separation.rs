//! What a causal graph says should be independent, checked against
//! partial correlations of data sampled from it.

use faithless::causal::LinearGaussianDag;
use faithless::stats::{partial_correlation, DEFAULT_FLOOR};

fn main() -> faithless::Result<()> {
    let dag = LinearGaussianDag::random(5, 0.4, 3)?;
    let data = dag.sample(20_000, 4);
    let g = &dag.graph;
    println!("edges: {:?}", g.edges().collect::<Vec<_>>());
    let nodes = g.nodes().to_vec();
    for (i, x) in nodes.iter().enumerate() {
        for (j, y) in nodes.iter().enumerate().skip(i + 1) {
            let rest: Vec<usize> = (0..nodes.len()).filter(|&k| k != i && k != j).collect();
            let z: Vec<&str> = rest.iter().map(|&k| nodes[k].as_str()).collect();
            let sep = g.d_separated(x, y, &z)?;
            let zs: Vec<&[f64]> = rest.iter().map(|&k| data[k].as_slice()).collect();
            let r = partial_correlation(&data[i], &data[j], &zs)?.value().unwrap_or(f64::NAN);
            let flag = if sep == (r.abs() < DEFAULT_FLOOR) { "" } else { "  <- mismatch" };
            println!("{x} _||_ {y} | rest: {sep:<5}  pcorr {r:+.3}{flag}");
        }
    }
    Ok(())
}
