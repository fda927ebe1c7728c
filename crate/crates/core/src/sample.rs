//! The bundled example corpus: a small path-algebra library.

pub const SAMPLE_CORPUS: &str = include_str!("../data/paths.corpus");
