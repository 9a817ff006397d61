use clap::Parser;

fn main() {
    let cli = dvbc::Cli::parse();
    std::process::exit(dvbc::run(&cli));
}
