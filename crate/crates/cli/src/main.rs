use clap::Parser;

fn main() {
    let cli = foamtor_cli::Cli::parse();
    std::process::exit(foamtor_cli::main_with(&cli));
}
