use clap::Parser;

fn main() {
    let args = fdkp::cli::Args::parse();
    std::process::exit(fdkp::cli::run(args) as i32);
}
