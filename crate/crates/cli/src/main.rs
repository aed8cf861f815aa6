use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cfpoly::functions::plugin::serve;
use cfpoly_cli::{function_handle, parse_domain, run, FunctionSource, ModeArg, RunConfig, EXIT_ERROR};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Relative,
    Absolute,
}

/// Cancellation-free polynomial approximation with C code generation.
#[derive(Debug, Parser)]
#[command(name = "cfpoly", version)]
struct Args {
    /// Function of x, e.g. "exp(sin(x)-cos(x^2))", or "argerf(x)".
    #[arg(long, conflicts_with = "plugin", required_unless_present = "plugin")]
    function: Option<String>,
    /// External program answering interval enclosure requests.
    #[arg(long)]
    plugin: Option<PathBuf>,
    /// Argument passed to the plugin program; repeatable.
    #[arg(long = "plugin-arg", allow_hyphen_values = true)]
    plugin_args: Vec<String>,
    /// Approximation domain, e.g. "[-2^-8;2^-8]".
    #[arg(long, allow_hyphen_values = true)]
    domain: String,
    /// Target error, e.g. 2^-90.
    #[arg(long, default_value = "2^-53", allow_hyphen_values = true)]
    target: String,
    #[arg(long, value_enum, default_value_t = Mode::Relative)]
    mode: Mode,
    #[arg(long, default_value_t = 8)]
    iter_limit: usize,
    /// Write the generated C function here.
    #[arg(long)]
    emit_c: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Working precision in bits.
    #[arg(long)]
    prec: Option<u32>,
    /// Name of the generated C function.
    #[arg(long, default_value = "poly")]
    name: String,
    /// Answer plugin requests for --function on stdin instead of running.
    #[arg(long, hide = true)]
    serve_plugin: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR as u8 } else { 0 });
        }
    };
    let function = match (&args.function, &args.plugin) {
        (Some(f), _) => FunctionSource::Expression(f.clone()),
        (None, Some(p)) => FunctionSource::Plugin { program: p.clone(), args: args.plugin_args.clone() },
        (None, None) => unreachable!("clap requires one of them"),
    };
    if args.serve_plugin {
        let prec = args.prec.unwrap_or(256);
        let served = parse_domain(&args.domain, prec)
            .and_then(|i| function_handle(&function, &i, prec))
            .and_then(|f| serve(&f, std::io::stdin().lock(), std::io::stdout().lock()));
        return match served {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_ERROR as u8)
            }
        };
    }
    let cfg = RunConfig {
        function,
        domain: args.domain,
        target: args.target,
        mode: match args.mode {
            Mode::Relative => ModeArg::Relative,
            Mode::Absolute => ModeArg::Absolute,
        },
        iter_limit: args.iter_limit,
        emit_c: args.emit_c,
        report: args.report,
        precision: args.prec,
        name: args.name,
    };
    ExitCode::from(run(&cfg) as u8)
}
