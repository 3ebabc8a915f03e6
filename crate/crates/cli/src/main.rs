//! `qlab`: evaluate q-functions, compute double q-Laplace transforms, run the
//! verification suites and solve the model equations.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Common, ScalarMode, TransformMode};

#[derive(Parser, Debug)]
#[command(name = "qlab", version, about = "q-calculus and double q-Laplace transform workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a q-function: qnum, qfact, qbinom, qpoch, eq, Eq, trig, gamma1, gamma2.
    #[command(allow_negative_numbers = true)]
    Eval {
        function: String,
        args: Vec<String>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ScalarMode,
        #[command(flatten)]
        common: Common,
    },
    /// Double transform of a descriptor such as `mono:1,1` or `expqadd:0.5,0.25,small`.
    #[command(allow_negative_numbers = true)]
    Transform {
        descriptor: String,
        #[arg(long, default_value = "1")]
        kind: String,
        #[arg(long, default_value = "1")]
        r: String,
        #[arg(long, default_value = "1")]
        s: String,
        #[arg(long, value_enum, default_value = "numeric")]
        mode: TransformMode,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite: identities, transforms, derivatives or all.
    Verify {
        suite: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ScalarMode,
        #[command(flatten)]
        common: Common,
    },
    /// Solve a model equation by transform.
    #[command(allow_negative_numbers = true)]
    Solve {
        equation: String,
        #[arg(long, default_value = "1")]
        c: String,
        #[arg(long, default_value = "0")]
        alpha: String,
        #[arg(long, default_value = "0")]
        beta: String,
        #[arg(long, default_value = "1")]
        k: String,
        /// Data at t = 0, e.g. `mono:2`, `2*esmall:1+const` or `zero`.
        #[arg(long, default_value = "zero")]
        f: String,
        #[arg(long, default_value = "zero")]
        g: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: ScalarMode,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Eval {
            function,
            args,
            mode,
            common,
        } => commands::eval(&function, &args, mode, &common),
        Command::Transform {
            descriptor,
            kind,
            r,
            s,
            mode,
            common,
        } => commands::transform(&descriptor, &kind, &r, &s, mode, &common),
        Command::Verify { suite, mode, common } => commands::verify(&suite, mode, &common),
        Command::Solve {
            equation,
            c,
            alpha,
            beta,
            k,
            f,
            g,
            mode,
            common,
        } => {
            let params = commands::SolveParams {
                c: &c,
                alpha: &alpha,
                beta: &beta,
                k: &k,
                f: &f,
                g: &g,
            };
            commands::solve(&equation, &params, mode, &common)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("qlab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
