//! Checks that the refined machine simulates the abstract one, then shows a
//! refinement failure caused by a seeded fault.

use eventb_core::checker::{refine_check, CheckConfig};
use eventb_core::whatsapp::mutants::Mutant;
use eventb_core::whatsapp::{machine0, machine2, project, ModelConfig};

fn main() {
    let cfg = ModelConfig::with_pools(3, 4);
    let search = CheckConfig {
        workers: 4,
        ..CheckConfig::with_depth(5)
    };

    let r = refine_check(&machine0(&cfg), &machine2(&cfg), project, &search).unwrap();
    println!("machine2 refines machine0: {} ({} states)", r.verdict, r.states_explored);

    let faulty = Mutant::ChattingWithoutReverseChat.apply_concrete(machine2(&cfg)).unwrap();
    let r = refine_check(&machine0(&cfg), &faulty, project, &search).unwrap();
    print!("{}", r.render());
}
