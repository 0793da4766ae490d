use clap::Parser;

use spinbridge_cli::{run_cli, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run_cli(&cli) {
        Ok(a) => {
            println!("{}", a.result.display());
            println!("{}", a.table.display());
            println!("{}", a.manifest.display());
        }
        Err(e) => {
            eprintln!("spinbridge: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
