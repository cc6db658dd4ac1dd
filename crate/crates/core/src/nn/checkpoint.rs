//! Binary tensor container.
//!
//! Layout (little endian): the 8-byte magic `FTSUMCKP`, a `u32` format
//! version, a `u32` entry count, then for each entry a `u32` name length, the
//! UTF-8 name, a precision tag byte (0 = f32, 1 = f64, 2 = raw bytes), a `u32`
//! rank, one `u64` per dimension and the raw values.

use std::io::{Read, Write};
use std::path::Path;

use super::params::NamedTensors;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FTSUMCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntryData {
    F32(Vec<f32>),
    F64(Vec<f64>),
    Bytes(Vec<u8>),
}

impl EntryData {
    fn tag(&self) -> u8 {
        match self {
            EntryData::F32(_) => 0,
            EntryData::F64(_) => 1,
            EntryData::Bytes(_) => 2,
        }
    }

    fn len(&self) -> usize {
        match self {
            EntryData::F32(v) => v.len(),
            EntryData::F64(v) => v.len(),
            EntryData::Bytes(v) => v.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: EntryData,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checkpoint {
    pub entries: Vec<Entry>,
}

impl Checkpoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_tensor(&mut self, name: &str, t: &Tensor, precision: Precision) {
        let data = match precision {
            Precision::F32 => EntryData::F32(t.data().iter().map(|x| *x as f32).collect()),
            Precision::F64 => EntryData::F64(t.data().to_vec()),
        };
        self.entries.push(Entry {
            name: name.to_string(),
            shape: t.shape().to_vec(),
            data,
        });
    }

    pub fn push_bytes(&mut self, name: &str, bytes: Vec<u8>) {
        self.entries.push(Entry {
            name: name.to_string(),
            shape: vec![bytes.len()],
            data: EntryData::Bytes(bytes),
        });
    }

    pub fn push_params<P: NamedTensors>(&mut self, prefix: &str, params: &P, precision: Precision) {
        for (name, t) in params.named() {
            self.push_tensor(&format!("{prefix}{name}"), t, precision);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn bytes(&self, name: &str) -> Result<&[u8]> {
        match self.get(name).map(|e| &e.data) {
            Some(EntryData::Bytes(b)) => Ok(b),
            Some(_) => Err(Error::Invalid(format!("checkpoint entry {name} is not a byte entry"))),
            None => Err(Error::Invalid(format!("checkpoint entry {name} missing"))),
        }
    }

    pub fn tensor(&self, name: &str) -> Result<Tensor> {
        let entry = self
            .get(name)
            .ok_or_else(|| Error::Invalid(format!("checkpoint entry {name} missing")))?;
        let data = match &entry.data {
            EntryData::F32(v) => v.iter().map(|x| *x as f64).collect(),
            EntryData::F64(v) => v.clone(),
            EntryData::Bytes(_) => {
                return Err(Error::Invalid(format!("checkpoint entry {name} is not numeric")))
            }
        };
        Tensor::from_vec(&entry.shape, data)
    }

    /// Fills every tensor of `params` from entries named `prefix + name`;
    /// shapes must match exactly.
    pub fn load_params<P: NamedTensors>(&self, prefix: &str, params: &mut P) -> Result<()> {
        for (name, t) in params.named_mut() {
            let full = format!("{prefix}{name}");
            let loaded = self.tensor(&full)?;
            if loaded.shape() != t.shape() {
                return Err(Error::shape(full, t.shape(), loaded.shape()));
            }
            *t = loaded;
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u32).to_le_bytes())?;
        for e in &self.entries {
            w.write_all(&(e.name.len() as u32).to_le_bytes())?;
            w.write_all(e.name.as_bytes())?;
            w.write_all(&[e.data.tag()])?;
            w.write_all(&(e.shape.len() as u32).to_le_bytes())?;
            for d in &e.shape {
                w.write_all(&(*d as u64).to_le_bytes())?;
            }
            match &e.data {
                EntryData::F32(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))?,
                EntryData::F64(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))?,
                EntryData::Bytes(v) => w.write_all(v)?,
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::parse("checkpoint", m.to_string());
        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let version = read_u32(&mut r)?;
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported format version {version}")));
        }
        let count = read_u32(&mut r)? as usize;
        let mut entries = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let name_len = read_u32(&mut r)? as usize;
            let mut name = vec![0u8; name_len];
            read_exact(&mut r, &mut name)?;
            let name = String::from_utf8(name).map_err(|_| bad("entry name is not UTF-8"))?;
            let mut tag = [0u8; 1];
            read_exact(&mut r, &mut tag)?;
            let rank = read_u32(&mut r)? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                let mut b = [0u8; 8];
                read_exact(&mut r, &mut b)?;
                shape.push(u64::from_le_bytes(b) as usize);
            }
            let len: usize = shape.iter().product();
            let data = match tag[0] {
                0 => {
                    let mut raw = vec![0u8; len * 4];
                    read_exact(&mut r, &mut raw)?;
                    EntryData::F32(
                        raw.chunks_exact(4)
                            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                            .collect(),
                    )
                }
                1 => {
                    let mut raw = vec![0u8; len * 8];
                    read_exact(&mut r, &mut raw)?;
                    EntryData::F64(
                        raw.chunks_exact(8)
                            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                            .collect(),
                    )
                }
                2 => {
                    let mut raw = vec![0u8; len];
                    read_exact(&mut r, &mut raw)?;
                    EntryData::Bytes(raw)
                }
                t => return Err(bad(&format!("unknown precision tag {t} for entry {name}"))),
            };
            debug_assert_eq!(data.len(), len);
            entries.push(Entry { name, shape, data });
        }
        Ok(Checkpoint { entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::parse("checkpoint", format!("truncated: {e}")))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(Checkpoint::read_from(&b"NOTACKPT\x01\0\0\0\0\0\0\0"[..]).is_err());
        let mut ck = Checkpoint::new();
        ck.push_tensor("w", &Tensor::vector(vec![1.0, 2.0]), Precision::F64);
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Checkpoint::read_from(&buf[..]).is_err());
    }

    #[test]
    fn f32_entries_store_single_precision() {
        let mut ck = Checkpoint::new();
        ck.push_tensor("w", &Tensor::vector(vec![0.1]), Precision::F32);
        let t = ck.tensor("w").unwrap();
        assert_eq!(t.data()[0], 0.1f32 as f64);
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            a in prop::collection::vec(any::<f64>(), 0..20),
            b in prop::collection::vec(any::<f32>(), 0..20),
            bytes in prop::collection::vec(any::<u8>(), 0..20),
        ) {
            let mut ck = Checkpoint::new();
            ck.entries.push(Entry { name: "a".into(), shape: vec![a.len()], data: EntryData::F64(a) });
            ck.entries.push(Entry { name: "b.x".into(), shape: vec![1, b.len()], data: EntryData::F32(b) });
            ck.push_bytes("meta", bytes);
            let mut buf = Vec::new();
            ck.write_to(&mut buf).unwrap();
            let back = Checkpoint::read_from(&buf[..]).unwrap();
            let mut buf2 = Vec::new();
            back.write_to(&mut buf2).unwrap();
            prop_assert_eq!(buf, buf2);
            prop_assert_eq!(back.entries.len(), 3);
        }
    }
}
