//! Seeded random walks over both machines. The same seed always gives the
//! same trace.

use eventb_core::machine::MachineState;
use eventb_core::whatsapp::{machine0, machine2, ModelConfig};

fn main() {
    let cfg = ModelConfig::with_pools(4, 8);
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);

    let walk = machine0(&cfg).random_walk(10_000, seed).expect("machine0 invariants hold");
    println!("machine0: {} steps, no violations", walk.trace.len());
    print!("{}", walk.final_state.dump());

    let walk = machine2(&cfg).random_walk(20, seed).expect("machine2 invariants hold");
    println!("\nmachine2, first 20 steps:");
    print!("{}", walk.trace);
    print!("{}", walk.final_state.dump());
}
