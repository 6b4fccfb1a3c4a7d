//! Set and relation operators on small hand-built values.

use eventb_core::relkernel::{parse_element, Element, FiniteRelation, FiniteSet};

fn rel(text: &str) -> FiniteRelation {
    parse_element(text).unwrap().as_relation().unwrap()
}

fn set(text: &str) -> FiniteSet {
    parse_element(text).unwrap().as_set().unwrap().clone()
}

fn main() {
    let chat = rel("{(A,B),(A,C),(B,A)}");
    let active = rel("{(A,B)}");
    let users = set("{A,B,C}");

    println!("chat            = {}", chat.to_element());
    println!("dom(chat)       = {}", Element::from(chat.dom()));
    println!("chat[{{A}}]       = {}", Element::from(chat.image(&set("{A}"))));
    println!("chat~           = {}", chat.inverse().to_element());
    println!("chat;chat       = {}", chat.compose(&chat).to_element());
    println!("{{A}} <<| chat    = {}", chat.dom_subtract(&set("{A}")).to_element());
    println!("chat |> {{A}}     = {}", chat.ran_restrict(&set("{A}")).to_element());
    println!("chat <+ (A,C)   = {}", chat.override_with(&rel("{(A,C)}")).to_element());
    println!("active <: chat  = {}", active.is_subset(&chat));
    println!("chat functional = {}", chat.is_functional());
    println!("chat in users +-> users = {}", chat.is_partial_function(&users, &users));

    let subsets: Vec<String> = users.subsets(1, 2).iter().map(|s| Element::from(s.clone()).to_string()).collect();
    println!("subsets of size 1..2: {}", subsets.join(" "));
}
