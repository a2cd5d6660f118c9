//! Sources of the C runtime, embedded so builds need no repository checkout.

pub const HEADER_NAME: &str = "oly_rt.h";
pub const SOURCE_NAME: &str = "oly_rt.c";
pub const HEADER: &str = include_str!("../../runtime/oly_rt.h");
pub const SOURCE: &str = include_str!("../../runtime/oly_rt.c");
