//! Library half of the `gbis` command line tool: the benchmark harness,
//! partition comparison and report writers. The thin binary in `main.rs`
//! maps these onto subcommands.

pub mod bench;
pub mod compare;
pub mod svg;
