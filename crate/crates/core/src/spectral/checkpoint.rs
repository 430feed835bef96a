//! Binary checkpoint format.
//!
//! Layout (little-endian): magic `PEA1`, format version `u32`, `N1 N2 N3`
//! as `u32`, `L1 L2 L3` as `f64`, time as `f64`, then the coefficient
//! arrays of `v1`, `v2` and `b`, each as interleaved `(re, im)` `f64` pairs
//! in row-major `(k1, k2, m)` order with the FFT frequency layout.

use std::fs;
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use super::{Domain, Geometry, Grid, Parity, ScalarField, StateVector};

pub const MAGIC: [u8; 4] = *b"PEA1";
/// Version of a plain state checkpoint.
pub const STATE_VERSION: u32 = 1;
/// Version of a tagged container (mode sets, interpolation operators).
pub const TAGGED_VERSION: u32 = 2;

const HEADER_LEN: usize = 4 + 4 + 3 * 4 + 3 * 8 + 8;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated input: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("trailing bytes: expected {expected} bytes total, got {got}")]
    TrailingBytes { expected: usize, got: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("unknown container tag {0}")]
    UnknownTag(u32),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("non-finite value at byte offset {0}")]
    NonFinite(usize),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// A decoded checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub time: f64,
    pub state: StateVector,
}

/// Bounds-checked little-endian reader.
pub struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.remaining() < n {
            return Err(CheckpointError::Truncated {
                offset: self.pos,
                needed: n,
                available: self.remaining(),
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u32(&mut self) -> Result<u32, CheckpointError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }

    pub fn f64(&mut self) -> Result<f64, CheckpointError> {
        let b = self.take(8)?;
        Ok(f64::from_le_bytes(b.try_into().expect("8 bytes")))
    }

    pub fn finite_f64(&mut self) -> Result<f64, CheckpointError> {
        let at = self.pos;
        let x = self.f64()?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(CheckpointError::NonFinite(at))
        }
    }

    pub fn finish(&self) -> Result<(), CheckpointError> {
        if self.remaining() != 0 {
            return Err(CheckpointError::TrailingBytes {
                expected: self.pos,
                got: self.data.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub(crate) fn put_f64(out: &mut Vec<u8>, x: f64) {
    out.extend_from_slice(&x.to_le_bytes());
}

pub(crate) fn put_geometry(out: &mut Vec<u8>, geom: &Geometry) {
    for n in geom.grid.dims() {
        put_u32(out, n as u32);
    }
    for l in geom.domain.lengths() {
        put_f64(out, l);
    }
}

pub(crate) fn read_geometry(r: &mut ByteReader<'_>) -> Result<Geometry, CheckpointError> {
    let n1 = r.u32()? as usize;
    let n2 = r.u32()? as usize;
    let n3 = r.u32()? as usize;
    let grid = Grid::new(n1, n2, n3).map_err(|e| CheckpointError::InvalidHeader(e.to_string()))?;
    let l1 = r.f64()?;
    let l2 = r.f64()?;
    let l3 = r.f64()?;
    let domain = Domain::new(l1, l2, l3).map_err(|e| CheckpointError::InvalidHeader(e.to_string()))?;
    Ok(Geometry::new(domain, grid))
}

pub fn encode(state: &StateVector, time: f64) -> Vec<u8> {
    let geom = state.geometry();
    let mut out = Vec::with_capacity(HEADER_LEN + 3 * 16 * geom.grid.len());
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, STATE_VERSION);
    put_geometry(&mut out, geom);
    put_f64(&mut out, time);
    put_state_body(&mut out, state);
    out
}

pub(crate) fn put_state_body(out: &mut Vec<u8>, state: &StateVector) {
    for f in state.fields() {
        for c in f.coeffs() {
            put_f64(out, c.re);
            put_f64(out, c.im);
        }
    }
}

pub(crate) fn read_state_body(r: &mut ByteReader<'_>, geom: Geometry) -> Result<StateVector, CheckpointError> {
    let n = geom.grid.len();
    // check the length before allocating anything proportional to the header
    let body = 3 * 16 * n;
    if r.remaining() < body {
        return Err(CheckpointError::Truncated {
            offset: r.position(),
            needed: body,
            available: r.remaining(),
        });
    }
    let mut fields = Vec::with_capacity(3);
    for parity in [Parity::Even, Parity::Even, Parity::Odd] {
        let mut coeffs = Vec::with_capacity(n);
        for _ in 0..n {
            let re = r.finite_f64()?;
            let im = r.finite_f64()?;
            coeffs.push(Complex64::new(re, im));
        }
        fields.push(ScalarField::from_coeffs(geom, coeffs, parity, true).expect("sized"));
    }
    let b = fields.pop().expect("three fields");
    let v2 = fields.pop().expect("three fields");
    let v1 = fields.pop().expect("three fields");
    Ok(StateVector { v1, v2, b })
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    let mut r = ByteReader::new(bytes);
    let magic: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != STATE_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let geom = read_geometry(&mut r)?;
    let time = r.finite_f64()?;
    let state = read_state_body(&mut r, geom)?;
    r.finish()?;
    Ok(Checkpoint { time, state })
}

pub fn write(path: &Path, state: &StateVector, time: f64) -> Result<(), CheckpointError> {
    fs::write(path, encode(state, time))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Checkpoint, CheckpointError> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn sample() -> StateVector {
        let geom = Geometry::new(Domain::new(1.0, 2.0, 3.0).unwrap(), Grid::new(8, 10, 12).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        StateVector::random(geom, &mut rng, 1e9, 0.5)
    }

    #[test]
    fn header_layout() {
        let s = sample();
        let bytes = encode(&s, 1.25);
        assert_eq!(&bytes[..4], b"PEA1");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 10);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 12);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(bytes[36..44].try_into().unwrap()), 3.0);
        assert_eq!(f64::from_le_bytes(bytes[44..52].try_into().unwrap()), 1.25);
        assert_eq!(bytes.len(), HEADER_LEN + 3 * 16 * 960);
        // first coefficient of v1 is (0,0,0): mean zero
        let re = f64::from_le_bytes(bytes[52..60].try_into().unwrap());
        assert_eq!(re, s.v1.coeffs()[0].re);
        let k = s.v1.coeffs()[1];
        assert_eq!(f64::from_le_bytes(bytes[68..76].try_into().unwrap()), k.re);
        assert_eq!(f64::from_le_bytes(bytes[76..84].try_into().unwrap()), k.im);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let s = sample();
        let c = decode(&encode(&s, 0.5)).unwrap();
        assert_eq!(c.time, 0.5);
        assert_eq!(c.state, s);
    }

    #[test]
    fn rejects_corruption() {
        let s = sample();
        let bytes = encode(&s, 0.0);
        assert!(matches!(decode(&bytes[..100]), Err(CheckpointError::Truncated { .. })));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(decode(&extra), Err(CheckpointError::TrailingBytes { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(CheckpointError::BadMagic(_))));
        let mut ver = bytes.clone();
        ver[4] = 9;
        assert!(matches!(decode(&ver), Err(CheckpointError::UnsupportedVersion(9))));
        let mut odd = bytes.clone();
        odd[8] = 9;
        assert!(matches!(decode(&odd), Err(CheckpointError::InvalidHeader(_))));
        let mut nan = bytes;
        nan[60..68].copy_from_slice(&f64::NAN.to_le_bytes());
        assert!(matches!(decode(&nan), Err(CheckpointError::NonFinite(60))));
    }

    #[test]
    fn huge_header_does_not_allocate() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"PEA1");
        put_u32(&mut bytes, 1);
        for _ in 0..3 {
            put_u32(&mut bytes, 4096);
        }
        for _ in 0..4 {
            put_f64(&mut bytes, 1.0);
        }
        assert!(matches!(decode(&bytes), Err(CheckpointError::Truncated { .. })));
    }
}
