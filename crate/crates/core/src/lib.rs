//! Guarded-event state machines over finite sets and relations, with a
//! breadth-first invariant and deadlock checker, a refinement checker, and
//! two machines modelling a chat messaging app (an abstract one and a
//! refinement that orders messages on each user's screen).

pub mod relkernel;
pub mod machine;
pub mod whatsapp;
pub mod checker;
pub mod scenario;
pub mod cli;
