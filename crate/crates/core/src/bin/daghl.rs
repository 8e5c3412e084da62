use std::io::{self, Write};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut err = io::stderr();
    let code = daghl::cli::run(std::env::args_os(), &mut input, &mut out, &mut err);
    let _ = out.flush();
    drop(out);
    std::process::exit(code);
}
