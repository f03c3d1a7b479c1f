//! Library side of the `plateau` command: the JSON report schema and the
//! exit-code contract. The binary in `main.rs` is a thin clap wrapper over
//! these pieces; keeping them in a library lets the integration tests
//! construct and parse result files with the same types the tool uses.

pub mod report;
