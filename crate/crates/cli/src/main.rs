use clap::Parser;

fn main() {
    let cli = match pim_cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // --help and --version are not usage errors
            std::process::exit(if err.use_stderr() { pim_cli::exit::USAGE } else { pim_cli::exit::OK });
        }
    };
    std::process::exit(pim_cli::run(cli));
}
