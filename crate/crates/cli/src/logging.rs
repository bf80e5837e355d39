//! Minimal stderr logger driven by the PARAMKL_LOG environment variable.

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Error,
    Warn,
    Info,
    Debug,
}

pub fn level() -> Level {
    match std::env::var("PARAMKL_LOG").as_deref() {
        Ok("error") => Level::Error,
        Ok("info") => Level::Info,
        Ok("debug") => Level::Debug,
        _ => Level::Warn,
    }
}

pub fn log(at: Level, message: &str) {
    if at <= level() {
        let tag = match at {
            Level::Error => "error",
            Level::Warn => "warn",
            Level::Info => "info",
            Level::Debug => "debug",
        };
        eprintln!("[paramkl {tag}] {message}");
    }
}

/// Echo numeric parameters unconditionally; this is the reproducibility
/// record for a run.
pub fn echo_params(command: &str, params: &[(&str, String)]) {
    let rendered: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    eprintln!("[paramkl] {command}: {}", rendered.join(" "));
}
