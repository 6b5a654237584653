//! Small zero-bias instances shipped with the library.
//!
//! Models a–c have vanilla-suppressed ground states (some ground states are
//! absent from the first-order late-time state); model d is only softly
//! biased. `two-triangles` has 36 ground states.

use crate::ising::{parse_instance, SpinInstance};

const SOURCES: [(&str, &str); 5] = [
    ("a", include_str!("../models/model-a.txt")),
    ("b", include_str!("../models/model-b.txt")),
    ("c", include_str!("../models/model-c.txt")),
    ("d", include_str!("../models/model-d.txt")),
    ("two-triangles", include_str!("../models/two-triangles.txt")),
];

/// Reverse-trial counts used for models a–d in the reference sweeps.
pub const REFERENCE_TRIALS: [(&str, usize); 4] = [("a", 32), ("b", 32), ("c", 64), ("d", 16)];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(name, _)| *name)
}

pub fn by_name(name: &str) -> Option<SpinInstance> {
    let (_, text) = SOURCES.iter().find(|(n, _)| *n == name)?;
    Some(parse_instance(text).expect("bundled instances parse").labeled(format!("model-{name}")))
}
