//! CSV output with a provenance header.
//!
//! Every file starts with `#` comment lines: the format version, the
//! command and its fully resolved configuration. Floats are written in
//! shortest round-trip form so that reruns compare byte for byte.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub const CSV_FORMAT_VERSION: u32 = 1;

pub struct CsvOut {
    inner: csv::Writer<Box<dyn Write>>,
}

impl CsvOut {
    /// `path = None` or `-` writes to stdout.
    pub fn create(
        path: Option<&Path>,
        command: &str,
        config: &str,
        columns: &[&str],
    ) -> io::Result<Self> {
        let mut w: Box<dyn Write> = match path {
            Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
            _ => Box::new(BufWriter::new(io::stdout())),
        };
        writeln!(w, "# fluxherm csv v{CSV_FORMAT_VERSION}")?;
        writeln!(w, "# command: {command}")?;
        for line in config.lines() {
            writeln!(w, "# config: {line}")?;
        }
        let mut inner = csv::WriterBuilder::new().from_writer(w);
        inner.write_record(columns)?;
        Ok(Self { inner })
    }

    pub fn row<I, S>(&mut self, fields: I) -> io::Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.inner.write_record(fields)?)
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Shortest round-trip representation in exponent form.
pub fn f(v: f64) -> String {
    format!("{v:e}")
}
