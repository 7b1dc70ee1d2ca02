mod args;
mod commands;
mod config;
mod output;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, CommonArgs, ProblemArgs};
use commands::{Context, Failure};
use config::Flags;

fn flags_of(p: &ProblemArgs) -> Flags {
    Flags {
        norm: p.norm.norm.clone(),
        shape: p.domain.clone(),
        cone: p.cone,
        profile: p.profile.clone(),
        h: p.h,
        load: p.f,
        out: p.norm.common.out.clone(),
        ..Flags::default()
    }
}

fn context(common: &CommonArgs, flags: Flags) -> Result<Context, Failure> {
    let file = match &common.config {
        Some(path) => Some(config::load(path).map_err(|e| Failure::Config(e.0))?),
        None => None,
    };
    let (resolved, warnings) = config::resolve(file, flags);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Context::new(resolved, wulff_core::rng::seed_from_env())
}

fn run(cli: Cli) -> Result<bool, Failure> {
    match cli.command {
        Command::NormsCheck { norm, samples } => {
            let flags = Flags {
                norm: norm.norm.clone(),
                samples,
                out: norm.common.out.clone(),
                ..Flags::default()
            };
            commands::norms_check(context(&norm.common, flags)?)
        }
        Command::NormsDual { norm, points } => {
            let flags = Flags {
                norm: norm.norm.clone(),
                points,
                out: norm.common.out.clone(),
                ..Flags::default()
            };
            commands::norms_dual(context(&norm.common, flags)?)
        }
        Command::Solve(p) => commands::solve(context(&p.norm.common, flags_of(&p))?),
        Command::CheckOverdetermined(p) => commands::check_overdetermined(context(&p.norm.common, flags_of(&p))?),
        Command::Compare(p) => commands::compare(context(&p.norm.common, flags_of(&p))?),
        Command::Flow { problem, x0, dt, exact } => {
            let flags = Flags {
                x0,
                dt,
                exact,
                ..flags_of(&problem)
            };
            commands::flow(context(&problem.norm.common, flags)?)
        }
        Command::Study { problem, hs, experiment } => {
            let flags = Flags {
                hs,
                experiment,
                ..flags_of(&problem)
            };
            commands::study(context(&problem.norm.common, flags)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Failure::Config(_) => 2,
                Failure::Runtime(_) => 1,
            })
        }
    }
}
