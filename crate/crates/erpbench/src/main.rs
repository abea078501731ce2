use clap::Parser;

fn main() -> anyhow::Result<()> {
    erpbench::cli::run(erpbench::cli::Cli::parse())
}
