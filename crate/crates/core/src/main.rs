use clap::Parser;

fn main() {
    let args = varactor_core::cli::Args::parse();
    std::process::exit(varactor_core::cli::main_with(args));
}
