//! Example models shipped with the crate.

use crate::dsl::{parse_model, ModelDocument};

pub const DEMO_CA: &str = include_str!("../models/demo_ca.ucit");
pub const DEMO_SEQ: &str = include_str!("../models/demo_seq.ucit");
pub const DEMO_FSM: &str = include_str!("../models/demo_fsm.ucit");

/// `(file name, source)` for every bundled model.
pub const ALL: [(&str, &str); 3] =
    [("demo_ca.ucit", DEMO_CA), ("demo_seq.ucit", DEMO_SEQ), ("demo_fsm.ucit", DEMO_FSM)];

pub fn demo_ca() -> ModelDocument {
    parse_model(DEMO_CA).expect("bundled model parses")
}

pub fn demo_seq() -> ModelDocument {
    parse_model(DEMO_SEQ).expect("bundled model parses")
}

pub fn demo_fsm() -> ModelDocument {
    parse_model(DEMO_FSM).expect("bundled model parses")
}
