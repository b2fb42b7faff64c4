use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Prints `v` rounded to 12 significant digits, in the shortest form that
/// round-trips the rounded value.
pub fn num(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if (1e-5..1e15).contains(&rounded.abs()) {
        rounded.to_string()
    } else {
        format!("{rounded:e}")
    }
}

/// `num` for values that end up in JSON.
pub fn round12(v: f64) -> f64 {
    num(v).parse().unwrap_or(v)
}

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Run parameters written as a `#` line ahead of every CSV.
pub struct Metadata {
    pub command: &'static str,
    pub epsilon: Option<f64>,
    pub tau_step: f64,
    pub alpha_step: Option<f64>,
    pub horizon: String,
}

impl Metadata {
    pub fn line(&self) -> String {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "-".into());
        format!(
            "# command={} epsilon={} tau_step={} alpha_step={} horizon={} tool_version={}",
            self.command,
            opt(self.epsilon),
            num(self.tau_step),
            opt(self.alpha_step),
            self.horizon,
            TOOL_VERSION
        )
    }
}

fn field(raw: &str) -> String {
    if raw.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw.to_string()
    }
}

/// CSV table with a metadata preamble; extra `#` lines may follow the rows.
pub struct Table {
    out: Box<dyn Write>,
}

impl Table {
    pub fn new(mut out: Box<dyn Write>, meta: &Metadata, header: &[&str]) -> io::Result<Self> {
        writeln!(out, "{}", meta.line())?;
        let mut table = Self { out };
        table.row(header)?;
        Ok(table)
    }

    pub fn row<I, S>(&mut self, fields: I) -> io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let line: Vec<String> = fields.into_iter().map(|f| field(f.as_ref())).collect();
        writeln!(self.out, "{}", line.join(","))
    }

    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "# {text}")
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
