use clap::Parser;

fn main() {
    let cli = chainlab_cli::args::Cli::parse();
    std::process::exit(chainlab_cli::run(&cli));
}
