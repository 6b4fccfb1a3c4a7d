//! Sends a few messages on the refined machine and reads them back in order.

use eventb_core::machine::Binding;
use eventb_core::relkernel::{parse_element, Element};
use eventb_core::whatsapp::{machine2, read_chat, ModelConfig};

fn main() {
    let m = machine2(&ModelConfig::with_pools(2, 3));
    let script = [
        "add_user u=A",
        "add_user u=B",
        "create_chat_session u1=A u2=B",
        "chatting_first_time u1=A u2=B c=c2 k1=1 k2=1",
        "chatting_refined u1=A u2=B c=c1 k1=2 k2=2",
        "chatting_refined u1=A u2=B c=c3 k1=3 k2=3",
    ];
    let mut s = m.initial_state();
    for line in script {
        let mut words = line.split(' ');
        let event = words.next().unwrap();
        let binding = words.fold(Binding::new(), |b, kv| {
            let (k, v) = kv.split_once('=').unwrap();
            b.with(k, parse_element(v).unwrap())
        });
        s = m.step(&s, event, &binding).unwrap();
    }
    let (a, b) = (Element::atom("A"), Element::atom("B"));
    let listing: Vec<String> = read_chat(&s, &a, &b).unwrap().iter().map(|c| c.to_string()).collect();
    println!("A's view of the chat with B: {}", listing.join(", "));
    let listing: Vec<String> = read_chat(&s, &b, &a).unwrap().iter().map(|c| c.to_string()).collect();
    println!("B's view of the chat with A: {}", listing.join(", "));
    println!("B has no cell for a chat with itself: {}", read_chat(&s, &b, &b).unwrap_err());
}
