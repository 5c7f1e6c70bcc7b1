use clap::Parser;

fn main() {
    let cli = rpdhg_cli::Cli::parse();
    std::process::exit(rpdhg_cli::run(&cli));
}
