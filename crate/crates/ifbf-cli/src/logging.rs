//! Minimal stderr logging gated by the `IFBF_LOG` environment variable
//! (`quiet`, `info`, `debug`; default `info`). Stdout is reserved for the
//! JSON and CSV outputs, which must stay byte-reproducible.

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Quiet,
    Info,
    Debug,
}

pub fn level() -> Level {
    match std::env::var("IFBF_LOG").as_deref() {
        Ok("quiet") => Level::Quiet,
        Ok("debug") => Level::Debug,
        _ => Level::Info,
    }
}

pub fn info(msg: &str) {
    if level() >= Level::Info {
        eprintln!("ifbf: {msg}");
    }
}

pub fn debug(msg: &str) {
    if level() >= Level::Debug {
        eprintln!("ifbf[debug]: {msg}");
    }
}
