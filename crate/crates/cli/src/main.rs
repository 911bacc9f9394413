use clap::Parser;

fn main() {
    let cli = atbench_cli::Cli::parse();
    let status = atbench_cli::run(cli);
    std::process::exit(status.code());
}
