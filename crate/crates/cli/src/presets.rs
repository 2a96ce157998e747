//! Experiment files bundled into the binary.

pub const PRESETS: &[(&str, &str)] = &[("circle-tracking", include_str!("../presets/circle-tracking.toml"))];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
