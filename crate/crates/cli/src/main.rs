use std::io::Write;

fn main() {
    let run = qcrystal_cli::execute(std::env::args_os());
    std::io::stdout().write_all(run.stdout.as_bytes()).ok();
    std::io::stderr().write_all(run.stderr.as_bytes()).ok();
    std::process::exit(run.code);
}
