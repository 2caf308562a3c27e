//! Runs every statistical claim at its default scale and prints the verdicts.
//!
//! ```text
//! cargo run --release --example verify_claims [claim ...]
//! ```

use std::time::Instant;

use glyder::harness::{verify, Claim, VerifyParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let claims: Vec<Claim> = if args.is_empty() {
        Claim::ALL.to_vec()
    } else {
        args.iter().map(|a| a.parse()).collect::<Result<_, _>>()?
    };
    let params = VerifyParams::default();
    let mut failed = 0;
    for claim in claims {
        let started = Instant::now();
        let verdict = verify(claim, &params)?;
        println!("{verdict}  [{:.1}s]", started.elapsed().as_secs_f64());
        failed += usize::from(!verdict.passed);
    }
    if failed > 0 {
        std::process::exit(2);
    }
    Ok(())
}
