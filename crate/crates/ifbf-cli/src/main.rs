use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use ifbf::solver::Variant;
use ifbf_cli::commands::{self, CheckOptions, RunOptions};
use ifbf_cli::exit_code;

const USAGE: &str = "\
usage: ifbf <subcommand> [options]

subcommands:
  plan <config.json>
      Check step-size feasibility and report the planned constants.
  run <config.json> [--trace out.csv] [--variant NAME] [--max-iters N] [--seed S]
      Solve the configured problem. Variants: inertial-fbf (default),
      tseng-plain, inertial-proximal-point.
  check <trace.csv> (--config <config.json> | --m1 V --m2 V)
      Replay the decrease, certificate and summability checks on a trace.
  compare <config.json> [--variants a,b,c] [--seed S]
      Run several variants from one configuration and report them side by side.

environment:
  IFBF_LOG = quiet | info | debug   (stderr verbosity, default info)";

fn usage_error(msg: &str) -> i32 {
    eprintln!("ifbf: {msg}\n\n{USAGE}");
    exit_code::PARSE
}

fn parse_flag_value(
    args: &mut std::iter::Peekable<std::vec::IntoIter<String>>,
    flag: &str,
) -> Result<String, i32> {
    args.next()
        .ok_or_else(|| usage_error(&format!("{flag} expects a value")))
}

fn real_main() -> i32 {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        return usage_error("missing subcommand");
    }
    let subcommand = args.remove(0);
    let mut args = args.into_iter().peekable();
    match subcommand.as_str() {
        "plan" => {
            let Some(path) = args.next() else {
                return usage_error("plan expects a config path");
            };
            if args.next().is_some() {
                return usage_error("plan takes exactly one argument");
            }
            commands::cmd_plan(&PathBuf::from(path))
        }
        "run" => {
            let Some(path) = args.next() else {
                return usage_error("run expects a config path");
            };
            let mut opts = RunOptions {
                config_path: PathBuf::from(path),
                trace_path: None,
                variant: Variant::InertialFbf,
                max_iters: None,
                seed: None,
            };
            while let Some(arg) = args.next() {
                match arg.as_str() {
                    "--trace" => match parse_flag_value(&mut args, "--trace") {
                        Ok(v) => opts.trace_path = Some(PathBuf::from(v)),
                        Err(code) => return code,
                    },
                    "--variant" => match parse_flag_value(&mut args, "--variant") {
                        Ok(v) => match Variant::from_str(&v) {
                            Ok(variant) => opts.variant = variant,
                            Err(e) => return usage_error(e),
                        },
                        Err(code) => return code,
                    },
                    "--max-iters" => match parse_flag_value(&mut args, "--max-iters") {
                        Ok(v) => match v.parse::<usize>() {
                            Ok(n) if n > 0 => opts.max_iters = Some(n),
                            _ => return usage_error("--max-iters expects a positive integer"),
                        },
                        Err(code) => return code,
                    },
                    "--seed" => match parse_flag_value(&mut args, "--seed") {
                        Ok(v) => match v.parse::<u64>() {
                            Ok(s) => opts.seed = Some(s),
                            Err(_) => return usage_error("--seed expects an unsigned integer"),
                        },
                        Err(code) => return code,
                    },
                    other => return usage_error(&format!("unknown option {other}")),
                }
            }
            commands::cmd_run(&opts)
        }
        "check" => {
            let Some(path) = args.next() else {
                return usage_error("check expects a trace path");
            };
            let mut opts = CheckOptions {
                trace_path: PathBuf::from(path),
                config_path: None,
                m1: None,
                m2: None,
            };
            while let Some(arg) = args.next() {
                match arg.as_str() {
                    "--config" => match parse_flag_value(&mut args, "--config") {
                        Ok(v) => opts.config_path = Some(PathBuf::from(v)),
                        Err(code) => return code,
                    },
                    "--m1" => match parse_flag_value(&mut args, "--m1") {
                        Ok(v) => match v.parse::<f64>() {
                            Ok(m) => opts.m1 = Some(m),
                            Err(_) => return usage_error("--m1 expects a number"),
                        },
                        Err(code) => return code,
                    },
                    "--m2" => match parse_flag_value(&mut args, "--m2") {
                        Ok(v) => match v.parse::<f64>() {
                            Ok(m) => opts.m2 = Some(m),
                            Err(_) => return usage_error("--m2 expects a number"),
                        },
                        Err(code) => return code,
                    },
                    other => return usage_error(&format!("unknown option {other}")),
                }
            }
            commands::cmd_check(&opts)
        }
        "compare" => {
            let Some(path) = args.next() else {
                return usage_error("compare expects a config path");
            };
            let mut variants = vec![Variant::InertialFbf, Variant::TsengPlain];
            let mut seed = None;
            while let Some(arg) = args.next() {
                match arg.as_str() {
                    "--variants" => match parse_flag_value(&mut args, "--variants") {
                        Ok(v) => {
                            let mut parsed = Vec::new();
                            for name in v.split(',') {
                                match Variant::from_str(name.trim()) {
                                    Ok(variant) => parsed.push(variant),
                                    Err(e) => return usage_error(e),
                                }
                            }
                            if parsed.is_empty() {
                                return usage_error("--variants expects at least one name");
                            }
                            variants = parsed;
                        }
                        Err(code) => return code,
                    },
                    "--seed" => match parse_flag_value(&mut args, "--seed") {
                        Ok(v) => match v.parse::<u64>() {
                            Ok(s) => seed = Some(s),
                            Err(_) => return usage_error("--seed expects an unsigned integer"),
                        },
                        Err(code) => return code,
                    },
                    other => return usage_error(&format!("unknown option {other}")),
                }
            }
            commands::cmd_compare(&PathBuf::from(path), &variants, seed)
        }
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            exit_code::OK
        }
        other => usage_error(&format!("unknown subcommand {other}")),
    }
}

fn main() -> ExitCode {
    ExitCode::from(u8::try_from(real_main()).unwrap_or(1))
}
