use std::io::Write;

fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let mut err = stderr.lock();
    let code = frieze_cli::run(std::env::args(), &mut out, &mut err);
    out.flush().expect("flushing stdout");
    std::process::exit(code);
}
