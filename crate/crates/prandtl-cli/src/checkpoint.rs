//! Binary snapshot files. The layout is documented in `docs/checkpoint.md`.

use std::path::Path;

use prandtl_core::{Field, Grid, Wall};

use crate::output::write_atomic;

pub const MAGIC: &[u8; 12] = b"PRANDTLCKPT\0";
pub const VERSION: u32 = 1;
/// Magic, version and the eleven 8-byte header words.
pub const HEADER_LEN: usize = 16 + 11 * 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("bad magic at offset 0")]
    BadMagic,
    #[error("unsupported version {found} at offset 12 (expected {VERSION})")]
    BadVersion { found: u32 },
    #[error("truncated at offset {offset}: need {needed} more bytes, have {available}")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("{trailing} trailing bytes after offset {offset}")]
    Trailing { offset: usize, trailing: usize },
    #[error("invalid header value `{name}` at offset {offset}")]
    BadHeader { name: &'static str, offset: usize },
    #[error("{name} mismatch: file has {found}, grid has {expected}")]
    GridMismatch { name: &'static str, expected: String, found: String },
}

/// Everything a checkpoint header records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub nx: usize,
    pub ny: usize,
    pub x_period: f64,
    pub y_max: f64,
    pub t: f64,
    pub dt: f64,
    pub wall: Wall,
    pub ell: f64,
    pub theta: f64,
    pub k: usize,
}

impl CheckpointHeader {
    pub fn grid(&self) -> Result<Grid, prandtl_core::Error> {
        Grid::new(self.nx, self.ny, self.x_period, self.y_max)
    }

    /// Errors unless the header describes `grid`, naming both values.
    pub fn check_grid(&self, grid: &Grid) -> Result<(), CheckpointError> {
        let pairs: [(&'static str, String, String); 4] = [
            ("nx", grid.nx().to_string(), self.nx.to_string()),
            ("ny", grid.ny().to_string(), self.ny.to_string()),
            ("x_period", grid.x_period().to_string(), self.x_period.to_string()),
            ("y_max", grid.y_max().to_string(), self.y_max.to_string()),
        ];
        for (name, expected, found) in pairs {
            if expected != found {
                return Err(CheckpointError::GridMismatch { name, expected, found });
            }
        }
        Ok(())
    }
}

pub fn encode(header: &CheckpointHeader, u: &Field) -> Vec<u8> {
    assert_eq!((u.nx(), u.ny()), (header.nx, header.ny), "field shape matches header");
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * u.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.nx as u64).to_le_bytes());
    out.extend_from_slice(&(header.ny as u64).to_le_bytes());
    for v in [header.x_period, header.y_max, header.t, header.dt] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&u64::from(header.wall.is_dirichlet()).to_le_bytes());
    for v in [header.wall.beta(), header.ell, header.theta] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(header.k as u64).to_le_bytes());
    for v in u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    offset: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], CheckpointError> {
        let available = self.bytes.len() - self.offset;
        if available < n {
            return Err(CheckpointError::Truncated {
                offset: self.offset,
                needed: n,
                available,
            });
        }
        let s = &self.bytes[self.offset..self.offset + n];
        self.offset += n;
        Ok(s)
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<(CheckpointHeader, Vec<f64>), CheckpointError> {
    let mut r = Reader { bytes, offset: 0 };
    if r.take(12).map_err(|_| CheckpointError::BadMagic)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let found = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if found != VERSION {
        return Err(CheckpointError::BadVersion { found });
    }
    let size = |r: &mut Reader, name| {
        let at = r.offset;
        let v = r.u64()?;
        usize::try_from(v).ok().filter(|&n| n > 0).ok_or(CheckpointError::BadHeader { name, offset: at })
    };
    let nx = size(&mut r, "nx")?;
    let ny = size(&mut r, "ny")?;
    let (x_period, y_max, t, dt) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let flag_at = r.offset;
    let flag = r.u64()?;
    let beta_at = r.offset;
    let beta = r.f64()?;
    let wall = match flag {
        1 => Wall::Dirichlet,
        0 => Wall::from_beta(beta).map_err(|_| CheckpointError::BadHeader { name: "beta", offset: beta_at })?,
        _ => return Err(CheckpointError::BadHeader { name: "wall flag", offset: flag_at }),
    };
    let (ell, theta) = (r.f64()?, r.f64()?);
    let k = r.u64()? as usize;
    let n = nx.checked_mul(ny).and_then(|n| n.checked_mul(8)).ok_or(CheckpointError::BadHeader { name: "nx * ny", offset: 16 })?;
    let data = r.take(n)?;
    let values = data.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    if r.offset != bytes.len() {
        return Err(CheckpointError::Trailing {
            offset: r.offset,
            trailing: bytes.len() - r.offset,
        });
    }
    let header = CheckpointHeader {
        nx,
        ny,
        x_period,
        y_max,
        t,
        dt,
        wall,
        ell,
        theta,
        k,
    };
    Ok((header, values))
}

pub fn write_checkpoint(path: &Path, header: &CheckpointHeader, u: &Field) -> Result<(), crate::CliError> {
    write_atomic(path, &encode(header, u))
}

/// Reads a checkpoint; with `grid` given, the header must describe it.
pub fn read_checkpoint(path: &Path, grid: Option<&Grid>) -> Result<(CheckpointHeader, Field), crate::CliError> {
    let bytes = std::fs::read(path).map_err(|e| crate::CliError::io(path, e))?;
    let (header, values) = decode(&bytes)?;
    let own;
    let grid = match grid {
        Some(g) => {
            header.check_grid(g)?;
            g
        }
        None => {
            own = header.grid()?;
            &own
        }
    };
    Ok((header, Field::from_values(grid, values)?))
}
