//! Black-box functions living in an external process.
//!
//! The protocol is line based. At start-up the host writes `orders` and the
//! plugin answers with the highest derivative order (0, 1 or 2) it can
//! enclose; any other answer counts as 0. For each evaluation the host then
//! writes
//!
//! ```text
//! <lo> <hi> <prec> [<order>]
//! ```
//!
//! where `lo` and `hi` are exact decimal expansions of the argument bounds
//! and `order`, when present, asks for a derivative. The plugin answers with
//! one line holding two numbers (decimal or hex float) that enclose the
//! image of `[lo, hi]`. The host rounds the answer outward to `prec` bits.
//! Any line starting with `error` is reported as a plugin failure.
//! Derivatives beyond the advertised order are taken by finite differences
//! on the host.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::{Arc, Mutex};

use rug::Float;

use super::handle::{FunctionHandle, RealFunction};
use crate::error::{Error, Result};
use crate::mparith::{format_decimal_exact, format_hex, parse_exact, IvBox, Prec};

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Requests are serialized through one child process.
struct Process {
    program: PathBuf,
    pipe: Mutex<Pipe>,
    max_order: u8,
}

impl Process {
    fn exchange(&self, line: &str) -> Result<String> {
        let mut pipe = self.pipe.lock().map_err(|_| Error::Plugin("plugin lock poisoned".into()))?;
        let io = |e: std::io::Error| Error::Plugin(format!("{}: {e}", self.program.display()));
        pipe.stdin.write_all(line.as_bytes()).map_err(io)?;
        pipe.stdin.flush().map_err(io)?;
        let mut answer = String::new();
        if pipe.stdout.read_line(&mut answer).map_err(io)? == 0 {
            return Err(Error::Plugin(format!("{} closed its output", self.program.display())));
        }
        Ok(answer.trim().to_string())
    }

    fn request(&self, x: &IvBox, prec: Prec, order: u8) -> Result<IvBox> {
        let mut line = format!("{} {} {}", format_decimal_exact(x.lo()), format_decimal_exact(x.hi()), prec);
        if order > 0 {
            line.push_str(&format!(" {order}"));
        }
        line.push('\n');
        let answer = self.exchange(&line)?;
        if answer.starts_with("error") {
            return Err(Error::Plugin(answer));
        }
        let mut it = answer.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(Error::Plugin(format!("malformed answer {answer:?}"))),
        };
        let bad = |_| Error::Plugin(format!("unparsable bound in answer {answer:?}"));
        let lo = parse_exact(a).map_err(bad)?;
        let hi = parse_exact(b).map_err(bad)?;
        if lo > hi {
            return Err(Error::Plugin(format!("answer [{a}, {b}] is not an interval")));
        }
        IvBox::hull_of(&lo, &hi, prec)
    }
}

impl Drop for Process {
    fn drop(&mut self) {
        if let Ok(pipe) = self.pipe.get_mut() {
            let _ = pipe.child.kill();
            let _ = pipe.child.wait();
        }
    }
}

/// A function, or one of its first two derivatives, evaluated by a plugin.
pub struct ProcessFunction {
    process: Arc<Process>,
    order: u8,
}

impl ProcessFunction {
    pub fn spawn(program: &Path, args: &[String]) -> Result<ProcessFunction> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Plugin(format!("cannot start {}: {e}", program.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut process =
            Process { program: program.to_path_buf(), pipe: Mutex::new(Pipe { child, stdin, stdout }), max_order: 0 };
        process.max_order = match process.exchange("orders\n")?.split_whitespace().collect::<Vec<_>>()[..] {
            ["orders", k] => k.parse::<u8>().unwrap_or(0).min(2),
            _ => 0,
        };
        Ok(ProcessFunction { process: Arc::new(process), order: 0 })
    }

    /// Highest derivative order the plugin encloses itself.
    pub fn max_order(&self) -> u8 {
        self.process.max_order
    }
}

impl RealFunction for ProcessFunction {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        self.process.request(x, prec, self.order)
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        (self.order < self.process.max_order)
            .then(|| Ok(Arc::new(ProcessFunction { process: self.process.clone(), order: self.order + 1 }) as Arc<dyn RealFunction>))
    }

    fn label(&self) -> String {
        let ticks = "'".repeat(usize::from(self.order));
        format!("plugin:{}{ticks}", self.process.program.display())
    }
}

pub fn plugin_handle(program: &Path, args: &[String]) -> Result<FunctionHandle> {
    Ok(FunctionHandle::new(ProcessFunction::spawn(program, args)?))
}

/// Answers protocol requests on `input` by evaluating `f` and its first two
/// derivatives, until end of input.
pub fn serve(f: &FunctionHandle, input: impl BufRead, mut output: impl Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Plugin(e.to_string());
    let d1 = f.derivative();
    let d2 = d1.as_ref().map_err(Clone::clone).and_then(|d| d.derivative());
    for line in input.lines() {
        let line = line.map_err(io)?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let reply = if line == "orders" {
            "orders 2\n".to_string()
        } else {
            let handles = [Ok(f), d1.as_ref(), d2.as_ref()];
            match answer(&handles, line) {
                Ok((lo, hi)) => format!("{} {}\n", format_hex(&lo), format_hex(&hi)),
                Err(e) => format!("error {e}\n"),
            }
        };
        output.write_all(reply.as_bytes()).map_err(io)?;
        output.flush().map_err(io)?;
    }
    Ok(())
}

fn answer(handles: &[std::result::Result<&FunctionHandle, &Error>; 3], line: &str) -> Result<(Float, Float)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    let (lo, hi, prec, order) = match parts[..] {
        [lo, hi, prec] => (lo, hi, prec, "0"),
        [lo, hi, prec, order] => (lo, hi, prec, order),
        _ => return Err(Error::Plugin(format!("malformed request {line:?}"))),
    };
    let prec: Prec = prec.parse().map_err(|_| Error::Plugin(format!("bad precision {prec:?}")))?;
    let order: usize = order.parse().map_err(|_| Error::Plugin(format!("bad derivative order {order:?}")))?;
    let f = handles.get(order).ok_or_else(|| Error::Plugin(format!("derivative order {order} not available")))?;
    let f = f.map_err(|e| e.clone())?;
    let x = IvBox::hull_of(&parse_exact(lo)?, &parse_exact(hi)?, prec.max(64) + 64)?;
    Ok(f.eval(&x, prec)?.into_bounds())
}
