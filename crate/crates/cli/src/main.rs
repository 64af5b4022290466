use std::io::Write;

fn main() {
    let (code, out) = signal_trees_cli::run(std::env::args_os());
    // reports go to stdout; diagnostics for failed runs go to stderr
    let written = if matches!(code, signal_trees_cli::EXIT_OK | signal_trees_cli::EXIT_MISMATCH) {
        std::io::stdout().write_all(out.as_bytes())
    } else {
        std::io::stderr().write_all(out.as_bytes())
    };
    if written.is_err() {
        std::process::exit(signal_trees_cli::EXIT_FAILURE);
    }
    std::process::exit(code);
}
