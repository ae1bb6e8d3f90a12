use std::process::ExitCode;

use wgdd::driver::{exit_code, parse_config, run, Invocation};

fn main() -> ExitCode {
    let config = match parse_config(std::env::args_os()) {
        Ok(Invocation::Run(c)) => c,
        Ok(Invocation::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    if config.out.is_none() {
        print!("{}", report.table.emit(config.format));
    }
    if !report.all_converged() {
        for l in report.levels.iter().filter(|l| !l.converged) {
            eprintln!("level {}: no convergence within {} iterations", l.level, config.max_iters);
        }
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
