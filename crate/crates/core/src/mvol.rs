//! `mvol 1` volume files.
//!
//! ```text
//! mvol 1
//! dims nx ny nz
//! spacing hx hy hz        (meters)
//! components c            (1 or 3)
//! frequency f             (Hz, 0 when not applicable)
//! data
//! <nx·ny·nz·c pairs of little-endian f64 (re, im)>
//! ```
//!
//! Values are x-fastest over voxels with the component index innermost.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexScalarField, DisplacementField, VoxelGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub grid: VoxelGrid,
    pub components: usize,
    pub frequency: f64,
    pub values: Vec<Complex64>,
}

impl Volume {
    pub fn into_scalar(self) -> Result<ComplexScalarField> {
        if self.components != 1 {
            return Err(Error::Format(format!(
                "expected a scalar volume, found {} components",
                self.components
            )));
        }
        ComplexScalarField::new(self.grid, self.values)
    }

    pub fn into_displacement(self) -> Result<DisplacementField> {
        if self.components != 3 {
            return Err(Error::Format(format!(
                "expected a 3-component volume, found {}",
                self.components
            )));
        }
        DisplacementField::new(self.grid, self.values, self.frequency)
    }
}

impl From<&ComplexScalarField> for Volume {
    fn from(f: &ComplexScalarField) -> Self {
        Volume {
            grid: *f.grid(),
            components: 1,
            frequency: 0.0,
            values: f.values().to_vec(),
        }
    }
}

impl From<&DisplacementField> for Volume {
    fn from(f: &DisplacementField) -> Self {
        Volume {
            grid: *f.grid(),
            components: 3,
            frequency: f.frequency(),
            values: f.values().to_vec(),
        }
    }
}

pub fn write_volume<W: Write>(mut w: W, vol: &Volume) -> Result<()> {
    let [nx, ny, nz] = vol.grid.dims();
    let [hx, hy, hz] = vol.grid.spacing();
    writeln!(w, "mvol 1")?;
    writeln!(w, "dims {nx} {ny} {nz}")?;
    writeln!(w, "spacing {hx:?} {hy:?} {hz:?}")?;
    writeln!(w, "components {}", vol.components)?;
    writeln!(w, "frequency {:?}", vol.frequency)?;
    writeln!(w, "data")?;
    let mut buf = Vec::with_capacity(vol.values.len() * 16);
    for v in &vol.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_volume<R: BufRead>(mut r: R) -> Result<Volume> {
    let mut line = String::new();
    let mut next_line = |r: &mut R| -> Result<String> {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("unexpected end of header".into()));
        }
        Ok(line.trim().to_string())
    };

    if next_line(&mut r)? != "mvol 1" {
        return Err(Error::Format("missing `mvol 1` magic line".into()));
    }
    let mut dims = None;
    let mut spacing = None;
    let mut components = None;
    let mut frequency = None;
    loop {
        let l = next_line(&mut r)?;
        if l == "data" {
            break;
        }
        let mut parts = l.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        match key {
            "dims" => dims = Some(parse_n::<usize, 3>(&rest, &l)?),
            "spacing" => spacing = Some(parse_n::<f64, 3>(&rest, &l)?),
            "components" => components = Some(parse_n::<usize, 1>(&rest, &l)?[0]),
            "frequency" => frequency = Some(parse_n::<f64, 1>(&rest, &l)?[0]),
            _ => return Err(Error::Format(format!("unknown header line `{l}`"))),
        }
    }
    let dims = dims.ok_or_else(|| Error::Format("missing dims".into()))?;
    let spacing = spacing.ok_or_else(|| Error::Format("missing spacing".into()))?;
    let components = components.ok_or_else(|| Error::Format("missing components".into()))?;
    let frequency = frequency.ok_or_else(|| Error::Format("missing frequency".into()))?;
    if components != 1 && components != 3 {
        return Err(Error::Format(format!("components must be 1 or 3, got {components}")));
    }
    let grid = VoxelGrid::new(dims, spacing)?;
    let count = grid.len() * components;
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload shorter than {count} complex values: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    Ok(Volume {
        grid,
        components,
        frequency,
        values,
    })
}

fn parse_n<T: std::str::FromStr, const N: usize>(parts: &[&str], line: &str) -> Result<[T; N]> {
    if parts.len() != N {
        return Err(Error::Format(format!("expected {N} values in `{line}`")));
    }
    let parsed: Vec<T> = parts
        .iter()
        .map(|p| p.parse::<T>().map_err(|_| Error::Format(format!("cannot parse `{p}` in `{line}`"))))
        .collect::<Result<_>>()?;
    parsed
        .try_into()
        .map_err(|_| Error::Format(format!("bad header line `{line}`")))
}

pub fn save(path: impl AsRef<Path>, vol: &Volume) -> Result<()> {
    write_volume(BufWriter::new(File::create(path)?), vol)
}

pub fn load(path: impl AsRef<Path>) -> Result<Volume> {
    read_volume(BufReader::new(File::open(path)?))
}
