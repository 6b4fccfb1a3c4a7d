//! Deadlock probes: a machine that can never start, the full abstract
//! machine, and a chatting-only machine started from a state where every
//! chat is muted.

use eventb_core::checker::{deadlock_probe, CheckConfig};
use eventb_core::whatsapp::{machine0, AbstractState, ModelConfig};

const ALL_MUTED: &str = "\
user = {A,B}
content = {c1}
chat = {(A,B),(B,A)}
active = {(A,B)}
muted = {(A,B),(B,A)}
chatcontent = {(A,{(c1,{B})}),(B,{(c1,{})})}
";

fn main() {
    let search = CheckConfig::with_depth(5);

    let stuck = machine0(&ModelConfig::with_pools(0, 0)).without_events(&["add_user", "add_content"]);
    println!("no registration events: {}", deadlock_probe(&stuck, &search).verdict);

    let full = machine0(&ModelConfig::with_pools(2, 2));
    let r = deadlock_probe(&full, &search);
    println!("full machine0: {} ({} states)", r.verdict, r.states_explored);

    let start: AbstractState = ALL_MUTED.parse().unwrap();
    let chatting_only = machine0(&ModelConfig::with_pools(2, 1))
        .retain_events(&["chatting", "select_chat"])
        .with_initial(start);
    let r = deadlock_probe(&chatting_only, &search);
    println!("chatting with every chat muted: {}", r.verdict);
    print!("{}", r.render());
}
