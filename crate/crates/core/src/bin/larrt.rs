use clap::Parser;

fn main() {
    let cli = larrt::cli::Cli::parse();
    let code = larrt::cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
