//! Checking files end to end: parse, elaborate, check, and answer the
//! document's `conclusion` and `proves` commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::arith::valid::Backend;
use crate::ast::{Command, Rat};
use crate::check::{check, Config};
use crate::elab::elaborate;
use crate::metrics::{measure, Metrics};
use crate::parser::{parse_document, parse_formula};
use crate::printer;
use crate::refine::proves;
use crate::reify::reify;
use crate::span::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    Check,
    Conclusion,
    Proves(String),
    Metrics,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub mode: Mode,
    pub backend: Backend,
    pub delta: Option<Rat>,
    pub dump_ssa: bool,
    pub dump_labels: bool,
    pub dump_obligations: bool,
    /// Per-obligation times on standard error.
    pub timings: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            mode: Mode::Check,
            backend: Backend::default(),
            delta: None,
            dump_ssa: false,
            dump_labels: false,
            dump_obligations: false,
            timings: false,
        }
    }
}

/// Ordered by severity; the exit code of a run is the worst status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    Failed,
    Unusable,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Failed => 1,
            Status::Unusable => 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub path: String,
    pub status: Status,
    pub stdout: String,
    pub stderr: String,
    pub diagnostics: Vec<Diagnostic>,
    pub metrics: Option<Metrics>,
}

impl Report {
    fn new(path: &str) -> Report {
        Report {
            path: path.to_string(),
            status: Status::Ok,
            stdout: String::new(),
            stderr: String::new(),
            diagnostics: Vec::new(),
            metrics: None,
        }
    }

    fn diag(&mut self, d: Diagnostic, src: &str) {
        self.stderr.push_str(&d.render(&self.path, src));
        if d.is_error() {
            self.status = self.status.max(Status::Failed);
        }
        self.diagnostics.push(d);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

/// Proof name of a file: its stem.
pub fn proof_name(path: &str) -> String {
    Path::new(path).file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.to_string())
}

pub fn run_source(path: &str, src: &str, opts: &Options) -> Report {
    let mut r = Report::new(path);
    let name = proof_name(path);
    let doc = match parse_document(src) {
        Ok(d) => d,
        Err(d) => {
            r.diag(d, src);
            return r;
        }
    };
    if opts.mode == Mode::Metrics {
        let m = measure(&doc, src);
        let _ = writeln!(r.stdout, "{}: lines {} model {} proof {} using {}", path, m.lines, m.model, m.proof, m.using);
        r.metrics = Some(m);
        return r;
    }
    let el = match elaborate(&doc) {
        Ok(el) => el,
        Err(ds) => {
            ds.into_iter().for_each(|d| r.diag(d, src));
            return r;
        }
    };
    for w in &el.warnings {
        r.diag(w.clone(), src);
    }
    if opts.dump_ssa {
        r.stdout.push_str(&el.dump_ssa());
    }
    if opts.dump_labels {
        r.stdout.push_str(&el.dump_labels());
    }
    let cfg = Config { backend: opts.backend.clone(), delta: opts.delta.clone(), name: name.clone() };
    let checked = check(&el, &cfg);
    for (span, text) in &checked.prints {
        let _ = writeln!(r.stdout, "{}:{}: {}", path, span.line, text);
    }
    for o in &checked.obligations {
        if opts.dump_obligations {
            let _ = writeln!(r.stdout, "{}:{}", path, o.summary());
        }
        if opts.timings {
            let _ = writeln!(r.stderr, "{}:{} ({} ms)", path, o.summary(), o.millis);
        }
    }
    for d in &checked.diagnostics {
        r.diag(d.clone(), src);
    }
    if !checked.ok() {
        return r;
    }
    for cmd in &doc.commands {
        match cmd {
            Command::Conclusion { name: n, with, span } if *n == name => {
                match reify(&el, &checked.facts, with.as_deref(), *span) {
                    Ok(c) => {
                        let _ = writeln!(r.stdout, "{}: {}", n, c.render());
                    }
                    Err(d) => r.diag(d, src),
                }
            }
            Command::Proves { name: n, target, span } if *n == name => {
                let outcome = reify(&el, &checked.facts, None, *span)
                    .and_then(|c| proves(&el, &c, target, &opts.backend, *span));
                match outcome {
                    Ok(_) => {
                        let _ = writeln!(r.stdout, "{} proves {}", n, printer::formula(target));
                    }
                    Err(d) => r.diag(d, src),
                }
            }
            Command::Conclusion { name: n, span, .. } | Command::Proves { name: n, span, .. } => {
                r.diag(Diagnostic::error(*span, format!("unknown proof `{}`; this document is `{}`", n, name)), src);
            }
        }
    }
    match &opts.mode {
        Mode::Check => {
            let _ = writeln!(r.stdout, "{}: ok ({} obligations)", path, checked.obligations.len());
        }
        Mode::Conclusion => match reify(&el, &checked.facts, None, Span::default()) {
            Ok(c) => {
                let _ = writeln!(r.stdout, "{}: {}", name, c.render());
            }
            Err(d) => r.diag(d, src),
        },
        Mode::Proves(text) => {
            let target = match parse_formula(text) {
                Ok(t) => t,
                Err(d) => {
                    let _ = writeln!(r.stderr, "invalid --proves formula: {}", d.message);
                    r.status = Status::Unusable;
                    return r;
                }
            };
            let outcome =
                reify(&el, &checked.facts, None, Span::default()).and_then(|c| proves(&el, &c, &target, &opts.backend, Span::default()));
            match outcome {
                Ok(_) => {
                    let _ = writeln!(r.stdout, "{} proves {}", name, printer::formula(&target));
                }
                Err(d) => {
                    let _ = writeln!(r.stderr, "{}: {}", path, d.message);
                    if let Some(h) = &d.hint {
                        let _ = writeln!(r.stderr, "  = hint: {}", h);
                    }
                    r.status = Status::Failed;
                    r.diagnostics.push(d);
                }
            }
        }
        Mode::Metrics => unreachable!(),
    }
    r
}

pub fn run_file(path: &Path, opts: &Options) -> Report {
    let shown = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(src) => run_source(&shown, &src, opts),
        Err(e) => {
            let mut r = Report::new(&shown);
            let _ = writeln!(r.stderr, "{}: cannot read: {}", shown, e);
            r.status = Status::Unusable;
            r
        }
    }
}

pub fn run_files_sequential(paths: &[PathBuf], opts: &Options) -> Vec<Report> {
    paths.iter().map(|p| run_file(p, opts)).collect()
}

/// Files are independent; reports come back in input order.
#[cfg(feature = "parallel")]
pub fn run_files(paths: &[PathBuf], opts: &Options) -> Vec<Report> {
    use rayon::prelude::*;
    paths.par_iter().map(|p| run_file(p, opts)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_files(paths: &[PathBuf], opts: &Options) -> Vec<Report> {
    run_files_sequential(paths, opts)
}

pub fn exit_code(reports: &[Report]) -> i32 {
    reports.iter().map(|r| r.status).max().unwrap_or(Status::Ok).code()
}
