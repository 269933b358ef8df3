//! Binary path dump: "SKS1", an 11-word little-endian header, then one
//! coefficient array per saved frame. The frame count follows from the file size.

use std::io::{self, Read, Write};

pub const MAGIC: &[u8; 4] = b"SKS1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DumpHeader {
    pub dim: u64,
    pub n: u64,
    pub k: u64,
    pub m: f64,
    pub chi: f64,
    pub sigma: f64,
    pub decay: f64,
    pub noise_modes: u64,
    pub dt: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl DumpHeader {
    pub fn n_coeffs(&self) -> usize {
        (self.k as usize).pow(self.dim as u32)
    }
}

pub fn write_dump<W: Write>(w: &mut W, header: &DumpHeader, frames: &[Vec<f64>]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    for v in [header.dim, header.n, header.k] {
        w.write_all(&v.to_le_bytes())?;
    }
    for v in [header.m, header.chi, header.sigma, header.decay] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&header.noise_modes.to_le_bytes())?;
    for v in [header.dt, header.horizon] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&header.seed.to_le_bytes())?;
    let nc = header.n_coeffs();
    for f in frames {
        if f.len() != nc {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "frame length differs from K^d"));
        }
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn word<R: Read>(r: &mut R) -> io::Result<[u8; 8]> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_dump<R: Read>(r: &mut R) -> io::Result<(DumpHeader, Vec<Vec<f64>>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
    }
    let u = |b: [u8; 8]| u64::from_le_bytes(b);
    let f = |b: [u8; 8]| f64::from_le_bytes(b);
    let header = DumpHeader {
        dim: u(word(r)?),
        n: u(word(r)?),
        k: u(word(r)?),
        m: f(word(r)?),
        chi: f(word(r)?),
        sigma: f(word(r)?),
        decay: f(word(r)?),
        noise_modes: u(word(r)?),
        dt: f(word(r)?),
        horizon: f(word(r)?),
        seed: u(word(r)?),
    };
    if header.dim == 0 || header.dim > 2 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "bad dimension"));
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    let nc = header.n_coeffs();
    if nc == 0 || rest.len() % (8 * nc) != 0 {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "truncated frame data"));
    }
    let frames = rest
        .chunks_exact(8 * nc)
        .map(|fr| fr.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
        .collect();
    Ok((header, frames))
}
