use std::io::Write;

use clap::Parser;
use msa_stiffness::io::cli::{run, Cli};

fn main() {
    // warnings share stderr with error records, so they are JSON lines too
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format(|buf, record| {
            let line = serde_json::json!({
                "level": record.level().as_str().to_lowercase(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        })
        .init();
    std::process::exit(run(Cli::parse()));
}
