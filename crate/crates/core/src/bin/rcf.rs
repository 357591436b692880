use std::io::{stderr, stdout};

fn main() {
    let args: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let verbosity = args.iter().fold(0usize, |n, a| match a.to_str() {
        Some("--verbose") => n + 1,
        Some(s)
            if s.starts_with('-') && !s.starts_with("--") && s[1..].chars().all(|c| c == 'v') =>
        {
            n + s.len() - 1
        }
        _ => n,
    });
    let level = match verbosity {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    let code = rcf_core::cli::run(args, &mut stdout().lock(), &mut stderr().lock());
    std::process::exit(code);
}
