use clap::Parser;

fn main() {
    let cli = heatreach::cli::Cli::parse();
    if let Err(e) = heatreach::cli::run(&cli.command) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
