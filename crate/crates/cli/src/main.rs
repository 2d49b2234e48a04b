use clap::Parser;

fn main() {
    let cli = apitask_cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = apitask_cli::run(&cli, &mut stdout) {
        eprintln!("error: {e}");
        let mut source = std::error::Error::source(&e);
        while let Some(s) = source {
            eprintln!("  caused by: {s}");
            source = s.source();
        }
        std::process::exit(e.exit_code());
    }
}
