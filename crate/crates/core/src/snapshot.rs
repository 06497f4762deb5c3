//! Binary snapshots of built indexes: an 8-byte magic, a kind tag, a format
//! version, then the bincode payload.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::atomic::AtomModel;
use crate::error::{io_err, Error, Result};
use crate::mpc::MpcIndex;

const MAGIC: &[u8; 8] = b"SEMCOMP\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum Kind {
    Mpc = 1,
    Atoms = 2,
}

pub trait Snapshot: Serialize + DeserializeOwned {
    const KIND: Kind;
}

impl Snapshot for MpcIndex {
    const KIND: Kind = Kind::Mpc;
}

impl Snapshot for AtomModel {
    const KIND: Kind = Kind::Atoms;
}

pub fn to_bytes<T: Snapshot>(v: &T) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(1 << 16);
    out.extend_from_slice(MAGIC);
    out.push(T::KIND as u8);
    out.extend_from_slice(&VERSION.to_le_bytes());
    bincode::serialize_into(&mut out, v).map_err(|e| Error::Snapshot(e.to_string()))?;
    Ok(out)
}

pub fn from_bytes<T: Snapshot>(bytes: &[u8]) -> Result<T> {
    let header = MAGIC.len() + 5;
    if bytes.len() < header || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Snapshot("not a snapshot file".into()));
    }
    let kind = bytes[MAGIC.len()];
    if kind != T::KIND as u8 {
        return Err(Error::Snapshot(format!("expected kind {}, found {kind}", T::KIND as u8)));
    }
    let version = u32::from_le_bytes(bytes[MAGIC.len() + 1..header].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version} (expected {VERSION})")));
    }
    bincode::deserialize(&bytes[header..]).map_err(|e| Error::Snapshot(e.to_string()))
}

pub fn save<T: Snapshot>(v: &T, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(v)?).map_err(io_err(path))
}

pub fn load<T: Snapshot>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    from_bytes(&std::fs::read(path).map_err(io_err(path))?)
}
