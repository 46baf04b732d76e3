use std::io::IsTerminal;

fn main() {
    let stdout = std::io::stdout();
    let tty = stdout.is_terminal();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    let mut console = remap::cli::Console {
        out: &mut out,
        err: &mut err,
        tty,
    };
    let code = remap::cli::run(std::env::args_os(), &mut console);
    drop(out);
    std::process::exit(code);
}
