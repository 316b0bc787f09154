//! Command-line interface (placeholder while modules land).

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    eprintln!("curvlie CLI not wired up yet");
    2
}
