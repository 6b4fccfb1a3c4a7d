//! Breadth-first search finds a shortest counterexample for each seeded fault.

use eventb_core::checker::{bfs_check, CheckConfig};
use eventb_core::whatsapp::mutants::Mutant;
use eventb_core::whatsapp::{machine0, machine2, ModelConfig};

fn main() {
    let cfg = ModelConfig::with_pools(3, 4);
    let search = CheckConfig::with_depth(6);
    for mutant in Mutant::ALL {
        let report = if mutant.is_concrete() {
            let m = mutant.apply_concrete(machine2(&cfg)).unwrap();
            let r = bfs_check(&m, &search);
            (r.verdict, r.states_explored, r.counterexample)
        } else {
            let m = mutant.apply_abstract(machine0(&cfg)).unwrap();
            let r = bfs_check(&m, &search);
            (r.verdict, r.states_explored, r.counterexample)
        };
        let (verdict, states, trace) = report;
        println!("== {mutant}: {verdict} after {states} states");
        if let Some(t) = trace {
            print!("{t}");
        }
    }
}
