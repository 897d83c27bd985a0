use clap::Parser;

fn main() {
    let cli = sdemem_cli::Cli::parse();
    match sdemem_cli::run(&cli) {
        Ok(msg) => println!("{msg}"),
        Err(e) => {
            eprintln!("{}", e.line());
            std::process::exit(e.exit_code());
        }
    }
}
