//! The `FLUXHERM1` field-dump format.
//!
//! ```text
//! FLUXHERM1
//! nr 20
//! nz 40
//! nphi 0
//! rmin 1
//! zmin -5
//! hr 0.25
//! hz 0.25
//! provenance free text on one line
//!
//! <B_R block><B_φ block><B_Z block>
//! ```
//!
//! `nr`/`nz` count intervals. Each block holds `planes·(nz+1)·(nr+1)`
//! little-endian `f64` in `[plane][Z][R]` order. Header floats use the
//! shortest round-trip representation, so load(write(d)) is bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use fluxherm_core::{FieldDump, Grid2D};
use thiserror::Error;

pub const MAGIC: &str = "FLUXHERM1";

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a FLUXHERM1 file")]
    BadMagic,
    #[error("header/payload mismatch: {0}")]
    HeaderMismatch(String),
    #[error("non-finite value in payload at index {0}")]
    NonFinitePayload(usize),
    #[error(transparent)]
    Core(#[from] fluxherm_core::Error),
}

impl DumpError {
    pub fn name(&self) -> &'static str {
        match self {
            DumpError::Io(_) => "Io",
            DumpError::BadMagic => "BadMagic",
            DumpError::HeaderMismatch(_) => "HeaderMismatch",
            DumpError::NonFinitePayload(_) => "NonFinitePayload",
            DumpError::Core(e) => e.name(),
        }
    }
}

pub fn write_field_dump_to<W: Write>(dump: &FieldDump, mut w: W) -> Result<(), DumpError> {
    let g = &dump.grid;
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "nr {}", g.n_r)?;
    writeln!(w, "nz {}", g.n_z)?;
    writeln!(w, "nphi {}", g.n_phi)?;
    writeln!(w, "rmin {}", g.r_min)?;
    writeln!(w, "zmin {}", g.z_min)?;
    writeln!(w, "hr {}", g.h_r)?;
    writeln!(w, "hz {}", g.h_z)?;
    let prov: String = dump
        .provenance
        .chars()
        .map(|c| if c == '\n' || c == '\r' { ' ' } else { c })
        .collect();
    writeln!(w, "provenance {prov}")?;
    writeln!(w)?;
    for block in [&dump.br, &dump.bphi, &dump.bz] {
        for v in block.iter() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_field_dump(dump: &FieldDump, path: &Path) -> Result<(), DumpError> {
    write_field_dump_to(dump, BufWriter::new(File::create(path)?))
}

fn header_value<'a>(line: &'a str, key: &str) -> Result<&'a str, DumpError> {
    match line.split_once(' ') {
        Some((k, v)) if k == key => Ok(v),
        _ if line == key => Ok(""),
        _ => Err(DumpError::HeaderMismatch(format!(
            "expected '{key}', found '{line}'"
        ))),
    }
}

fn parse<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, DumpError> {
    header_value(line, key)?
        .trim()
        .parse()
        .map_err(|_| DumpError::HeaderMismatch(format!("bad value for '{key}'")))
}

pub fn load_field_dump_from<R: Read>(r: R) -> Result<FieldDump, DumpError> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    let mut next = |r: &mut BufReader<R>| -> Result<String, DumpError> {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(DumpError::HeaderMismatch("truncated header".into()));
        }
        Ok(line.trim_end_matches(['\n', '\r']).to_string())
    };
    // Bytes rather than a line read: a corrupt binary file may not be UTF-8.
    let mut magic = [0u8; MAGIC.len() + 1];
    if r.read_exact(&mut magic).is_err()
        || &magic[..MAGIC.len()] != MAGIC.as_bytes()
        || magic[MAGIC.len()] != b'\n'
    {
        return Err(DumpError::BadMagic);
    }
    let n_r: usize = parse(&next(&mut r)?, "nr")?;
    let n_z: usize = parse(&next(&mut r)?, "nz")?;
    let n_phi: usize = parse(&next(&mut r)?, "nphi")?;
    let r_min: f64 = parse(&next(&mut r)?, "rmin")?;
    let z_min: f64 = parse(&next(&mut r)?, "zmin")?;
    let h_r: f64 = parse(&next(&mut r)?, "hr")?;
    let h_z: f64 = parse(&next(&mut r)?, "hz")?;
    let provenance = header_value(&next(&mut r)?, "provenance")?.to_string();
    if !next(&mut r)?.is_empty() {
        return Err(DumpError::HeaderMismatch(
            "missing blank line after header".into(),
        ));
    }
    let grid = Grid2D::new(r_min, z_min, h_r, h_z, n_r, n_z, n_phi)?;
    let n = grid.sample_len();
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != 3 * n * 8 {
        return Err(DumpError::HeaderMismatch(format!(
            "header declares {} values, payload holds {} bytes",
            3 * n,
            payload.len()
        )));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(DumpError::NonFinitePayload(i));
    }
    let mut it = values.chunks_exact(n).map(<[f64]>::to_vec);
    let (br, bphi, bz) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    Ok(FieldDump::new(grid, br, bphi, bz, provenance)?)
}

pub fn load_field_dump(path: &Path) -> Result<FieldDump, DumpError> {
    load_field_dump_from(File::open(path)?)
}
