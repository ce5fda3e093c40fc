//! Finite-difference check of every layer's backward pass.
//!
//! cargo run --release --example gradient_check -- [seed]

use matchconv::gradcheck::{run_all, GradcheckConfig};

fn main() -> matchconv::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let config = GradcheckConfig {
        seed,
        ..GradcheckConfig::default()
    };
    for r in run_all(&config)? {
        println!(
            "{:<26} max relative error {:.2e} over {} instances ({})",
            r.layer,
            r.max_relative_error,
            r.instances,
            if r.passed(config.tolerance) {
                "ok"
            } else {
                "FAILED"
            }
        );
    }
    Ok(())
}
