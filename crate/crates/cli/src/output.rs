//! CSV/JSON artifacts with a metadata header; floats always printed like `%.12g`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 12 significant digits, shortest of fixed/scientific as C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..12).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (11 - exp) as usize))
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(config: &RunConfig, columns: &[String]) -> Self {
        let mut text = String::new();
        writeln!(text, "# harper {VERSION} config {}", config.hash()).unwrap();
        writeln!(text, "# {}", config.to_json()).unwrap();
        writeln!(text, "{}", columns.join(",")).unwrap();
        Csv { text }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells.iter().map(Cell::render).collect();
        writeln!(self.text, "{}", line.join(",")).unwrap();
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub enum Cell {
    F(f64),
    S(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(x) => fmt_g(*x),
            Cell::S(s) if s.contains(',') || s.contains('"') => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        }
    }
}

/// JSON document with the config hash and version alongside the payload.
pub fn json_report<T: Serialize>(config: &RunConfig, payload: &T) -> String {
    #[derive(Serialize)]
    struct Envelope<'a, T> {
        tool: &'static str,
        version: &'static str,
        config_hash: String,
        config: &'a RunConfig,
        report: &'a T,
    }
    let env = Envelope { tool: "harper", version: VERSION, config_hash: config.hash(), config, report: payload };
    serde_json::to_string_pretty(&env).expect("report serializes") + "\n"
}

/// Where artifacts go: files under a directory, or stdout.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        }
        Ok(Sink { dir })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn emit(&self, name: &str, contents: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(d) => {
                let p = d.join(name);
                std::fs::write(&p, contents).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
            }
            None => {
                print!("{contents}");
                Ok(())
            }
        }
    }
}
