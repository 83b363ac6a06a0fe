use clap::Parser as _;

fn main() {
    let cli = match kirch_cli::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version are successes; anything else is a usage error.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp
                | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = kirch_cli::commands::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
