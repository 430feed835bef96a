//! Tagged binary container for states, mode sets and interpolation
//! operators.
//!
//! Layout (little-endian): magic `PEA1`, version `2` as u32, a u32 tag, then
//! the grid sizes and box lengths, then a tag-specific payload.
//!
//! * tag 1, state: time as f64 followed by the three coefficient arrays in
//!   the same layout as a version 1 checkpoint.
//! * tag 2, mode set: grid capacity u32, a u32 flag and f64 for
//!   `lambda_{N+1}`, the mode count u32, then per mode `lambda` f64, the
//!   wavevector as three i32, the component index u32 and a sparse shape.
//! * tag 3, operator: Lagrange flag u32, count u32, then per functional the
//!   sparse Riesz element and the sparse reconstruction element.
//!
//! A sparse shape is an entry count u32 followed by entries
//! `(component u32, index u32, re f64, im f64)`.

use rustfft::num_complex::Complex64;

use super::interpolation::InterpolationOperator;
use super::modes::{Mode, ModeSet};
use super::sparse::{Entry, SparseState};
use crate::spectral::checkpoint::{
    put_f64, put_geometry, put_state_body, put_u32, read_geometry, read_state_body, ByteReader, Checkpoint,
    CheckpointError, MAGIC, TAGGED_VERSION,
};
use crate::spectral::{Geometry, StateVector};

pub const TAG_STATE: u32 = 1;
pub const TAG_MODE_SET: u32 = 2;
pub const TAG_OPERATOR: u32 = 3;

const ENTRY_BYTES: usize = 4 + 4 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub enum Container {
    State(Checkpoint),
    ModeSet(ModeSet),
    Operator(InterpolationOperator),
}

fn header(tag: u32, geom: &Geometry) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, TAGGED_VERSION);
    put_u32(&mut out, tag);
    put_geometry(&mut out, geom);
    out
}

fn put_sparse(out: &mut Vec<u8>, s: &SparseState) {
    put_u32(out, s.entries.len() as u32);
    for e in &s.entries {
        put_u32(out, e.component as u32);
        put_u32(out, e.index as u32);
        put_f64(out, e.value.re);
        put_f64(out, e.value.im);
    }
}

fn read_sparse(r: &mut ByteReader<'_>, geom: &Geometry) -> Result<SparseState, CheckpointError> {
    let count = read_count(r, ENTRY_BYTES)?;
    let mut entries = Vec::with_capacity(count);
    for _ in 0..count {
        let component = r.u32()? as usize;
        let index = r.u32()? as usize;
        if component > 2 || index >= geom.grid.len() {
            return Err(CheckpointError::InvalidPayload(format!(
                "entry ({component}, {index}) outside the grid"
            )));
        }
        let re = r.finite_f64()?;
        let im = r.finite_f64()?;
        entries.push(Entry {
            component,
            index,
            value: Complex64::new(re, im),
        });
    }
    Ok(SparseState::new(entries))
}

/// Reads a count and checks that at least `count * min_item` bytes remain.
fn read_count(r: &mut ByteReader<'_>, min_item: usize) -> Result<usize, CheckpointError> {
    let offset = r.position();
    let count = r.u32()? as usize;
    let needed = count.saturating_mul(min_item);
    if needed > r.remaining() {
        return Err(CheckpointError::Truncated {
            offset,
            needed,
            available: r.remaining(),
        });
    }
    Ok(count)
}

pub fn encode_state(state: &StateVector, time: f64) -> Vec<u8> {
    let mut out = header(TAG_STATE, state.geometry());
    put_f64(&mut out, time);
    put_state_body(&mut out, state);
    out
}

pub fn encode_mode_set(set: &ModeSet) -> Vec<u8> {
    let mut out = header(TAG_MODE_SET, set.geometry());
    put_u32(&mut out, set.grid_capacity() as u32);
    put_u32(&mut out, u32::from(set.next_lambda().is_some()));
    put_f64(&mut out, set.next_lambda().unwrap_or(0.0));
    put_u32(&mut out, set.len() as u32);
    for m in set.modes() {
        put_f64(&mut out, m.lambda);
        for k in m.wavevector {
            out.extend_from_slice(&(k as i32).to_le_bytes());
        }
        put_u32(&mut out, m.component as u32);
        put_sparse(&mut out, &m.shape);
    }
    out
}

pub fn encode_operator(op: &InterpolationOperator) -> Vec<u8> {
    let mut out = header(TAG_OPERATOR, op.geometry());
    put_u32(&mut out, u32::from(op.is_lagrange()));
    put_u32(&mut out, op.rank() as u32);
    for (g, p) in op.riesz_elements().iter().zip(op.reconstruction_elements()) {
        put_sparse(&mut out, g);
        put_sparse(&mut out, p);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Container, CheckpointError> {
    let mut r = ByteReader::new(bytes);
    let magic: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != TAGGED_VERSION {
        return Err(CheckpointError::UnsupportedVersion(version));
    }
    let tag = r.u32()?;
    if !(TAG_STATE..=TAG_OPERATOR).contains(&tag) {
        return Err(CheckpointError::UnknownTag(tag));
    }
    let geom = read_geometry(&mut r)?;
    let out = match tag {
        TAG_STATE => {
            let time = r.finite_f64()?;
            let state = read_state_body(&mut r, geom)?;
            Container::State(Checkpoint { time, state })
        }
        TAG_MODE_SET => Container::ModeSet(decode_mode_set(&mut r, geom)?),
        _ => {
            let flag = r.u32()?;
            let count = read_count(&mut r, 8)?;
            let mut riesz = Vec::with_capacity(count);
            let mut psi = Vec::with_capacity(count);
            for _ in 0..count {
                riesz.push(read_sparse(&mut r, &geom)?);
                psi.push(read_sparse(&mut r, &geom)?);
            }
            let op = InterpolationOperator::new(geom, riesz, psi)
                .map_err(|e| CheckpointError::InvalidPayload(e.to_string()))?;
            if op.is_lagrange() != (flag == 1) || flag > 1 {
                return Err(CheckpointError::InvalidPayload(format!(
                    "stored Lagrange flag {flag} disagrees with the elements"
                )));
            }
            Container::Operator(op)
        }
    };
    r.finish()?;
    Ok(out)
}

fn decode_mode_set(r: &mut ByteReader<'_>, geom: Geometry) -> Result<ModeSet, CheckpointError> {
    let capacity = r.u32()? as usize;
    let has_next = r.u32()?;
    let next = r.finite_f64()?;
    if has_next > 1 {
        return Err(CheckpointError::InvalidPayload(format!("bad flag {has_next}")));
    }
    let count = read_count(r, 8 + 12 + 4 + 4)?;
    if count > capacity {
        return Err(CheckpointError::InvalidPayload(format!(
            "{count} modes exceed the stated capacity {capacity}"
        )));
    }
    let cutoffs = geom.grid.cutoffs();
    let mut modes = Vec::with_capacity(count);
    let mut previous = 0.0;
    for _ in 0..count {
        let lambda = r.finite_f64()?;
        let mut wavevector = [0i64; 3];
        for (axis, k) in wavevector.iter_mut().enumerate() {
            *k = r.u32()? as i32 as i64;
            if k.unsigned_abs() as usize > cutoffs[axis] {
                return Err(CheckpointError::InvalidPayload(format!("wavevector component {k} out of band")));
            }
        }
        let component = r.u32()? as usize;
        if component > 5 || !(lambda > 0.0) || lambda < previous {
            return Err(CheckpointError::InvalidPayload(format!(
                "mode with lambda {lambda}, component {component} breaks the ordering"
            )));
        }
        previous = lambda;
        let shape = read_sparse(r, &geom)?;
        modes.push(Mode {
            lambda,
            wavevector,
            component,
            shape,
        });
    }
    let next_lambda = if has_next == 1 {
        if !(next >= previous && next > 0.0) {
            return Err(CheckpointError::InvalidPayload(format!("next eigenvalue {next} is out of order")));
        }
        Some(next)
    } else {
        None
    };
    Ok(ModeSet::from_parts(geom, modes, next_lambda, capacity))
}
