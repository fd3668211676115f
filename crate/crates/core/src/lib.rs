pub mod numkit;
pub mod netgraph;
pub mod synth;
pub mod switchsim;
pub mod verify;
pub mod cli;
