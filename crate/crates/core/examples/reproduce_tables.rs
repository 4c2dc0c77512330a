//! Regenerates every correlation table and prints computed vs published values.
//!
//!     cargo run --release --example reproduce_tables [seed]

use faithless::experiments::{default_floor, run_tables, DEFAULT_SEED};
use faithless::reference::references;

fn main() -> faithless::Result<()> {
    let seed = std::env::args().nth(1).map_or(DEFAULT_SEED, |s| s.parse().expect("seed must be an integer"));
    let ids: Vec<&str> = references().tables.iter().map(|t| t.id.as_str()).collect();
    for table in run_tables(&ids, seed, default_floor())? {
        println!("Table {}: {} [{}]", table.id, table.title, if table.pass() { "pass" } else { "FAIL" });
        for c in &table.cells {
            let v = c.value.value().map_or("undef".to_string(), |v| format!("{v:+.3}"));
            let published = c.published.map_or(String::new(), |p| format!("{p:+.3}"));
            let mark = match c.pass {
                Some(false) => "  <-- outside tolerance",
                _ => "",
            };
            println!(
                "  {:>5} {:<5} {v:>7}  {published:>7}  {:<10} {}{mark}",
                c.a,
                c.b,
                c.class,
                c.pattern.as_deref().unwrap_or("")
            );
        }
        for c in &table.checks {
            println!("  {:<16} {:.4} in [{}, {}]: {}", c.quantity, c.value, c.range.0, c.range.1, c.pass);
        }
    }
    Ok(())
}
