use clap::Parser;
use serde_json::{json, Value};
use std::process::ExitCode;

use advqa_cli::{run, Cli};

fn print_summary(summary: &Value, as_json: bool) {
    if as_json {
        println!("{summary}");
        return;
    }
    match summary {
        Value::Object(m) => {
            for (k, v) in m {
                match v {
                    Value::String(s) => println!("{k}: {s}"),
                    other => println!("{k}: {other}"),
                }
            }
        }
        other => println!("{other}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(&cli) {
        Ok(summary) => {
            print_summary(&summary, cli.common.json);
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.common.json {
                eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::FAILURE
        }
    }
}
