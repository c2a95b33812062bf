use std::io::{self, BufWriter};

fn main() {
    let mut out = BufWriter::new(io::stdout());
    let mut err = io::stderr();
    let code = pellsieve_cli::run(std::env::args_os(), &mut out, &mut err);
    drop(out);
    std::process::exit(code);
}
