use clap::Parser;
use hpk::cli::{run, Args};

fn main() {
    let args = Args::parse();
    let code = match args.resolve() {
        Ok(config) => match run(&config) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                match e {
                    hpk::Error::Config(_) | hpk::Error::InvalidWeight(_) | hpk::Error::Io(_) => 2,
                    _ => 1,
                }
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    std::process::exit(code);
}
