//! Binary checkpoint format for trained networks.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    8 bytes  "SUPVCKP1"
//! version  u32      1
//! digest   u64      caller-provided config digest
//! nets     u32      number of networks
//! per net: layers u32, then (input u32, output u32) per layer
//! per net, per layer: weights (input*output f64, input-major), biases
//! ```
//!
//! Loading validates the header, layer chaining, and (when given) the
//! expected digest, so a checkpoint cannot be applied to a mismatched
//! configuration silently.

use super::net::{DenseLayer, DenseNetwork};
use crate::error::{CoreError, Result};
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"SUPVCKP1";
const VERSION: u32 = 1;

/// FNV-1a digest of a canonical configuration string, stored in checkpoint
/// headers to tie a model to the task it was trained for.
pub fn config_digest(canonical: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canonical.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

pub fn save_checkpoint(path: &Path, digest: u64, nets: &[&DenseNetwork]) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&digest.to_le_bytes());
    out.extend_from_slice(&(nets.len() as u32).to_le_bytes());
    for net in nets {
        out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
        for layer in net.layers() {
            out.extend_from_slice(&(layer.input as u32).to_le_bytes());
            out.extend_from_slice(&(layer.output as u32).to_le_bytes());
        }
    }
    for net in nets {
        for layer in net.layers() {
            for w in &layer.weights {
                out.extend_from_slice(&w.to_le_bytes());
            }
            for b in &layer.biases {
                out.extend_from_slice(&b.to_le_bytes());
            }
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

struct Reader<'a> {
    data: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.data.len() < len {
            return Err(CoreError::Format("checkpoint truncated".into()));
        }
        let (head, tail) = self.data.split_at(len);
        self.data = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_vec(&mut self, count: usize) -> Result<Vec<f64>> {
        let bytes = self.take(count * 8)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

/// Loads the stored digest and networks. With `expected_digest` set, a
/// mismatch is rejected.
pub fn load_checkpoint(
    path: &Path,
    expected_digest: Option<u64>,
) -> Result<(u64, Vec<DenseNetwork>)> {
    let mut data = Vec::new();
    fs::File::open(path)?.read_to_end(&mut data)?;
    let mut r = Reader { data: &data };

    if r.take(8)? != MAGIC {
        return Err(CoreError::Format("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CoreError::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let digest = r.u64()?;
    if let Some(expected) = expected_digest {
        if digest != expected {
            return Err(CoreError::Format(format!(
                "checkpoint digest {digest:#018x} does not match the current \
                 configuration ({expected:#018x})"
            )));
        }
    }

    let net_count = r.u32()? as usize;
    if net_count == 0 || net_count > 16 {
        return Err(CoreError::Format(format!(
            "implausible network count {net_count}"
        )));
    }
    let mut shapes = Vec::with_capacity(net_count);
    for _ in 0..net_count {
        let layer_count = r.u32()? as usize;
        if layer_count == 0 || layer_count > 64 {
            return Err(CoreError::Format(format!(
                "implausible layer count {layer_count}"
            )));
        }
        let mut dims = Vec::with_capacity(layer_count);
        for _ in 0..layer_count {
            let input = r.u32()? as usize;
            let output = r.u32()? as usize;
            dims.push((input, output));
        }
        shapes.push(dims);
    }

    let mut nets = Vec::with_capacity(net_count);
    for dims in shapes {
        let mut layers = Vec::with_capacity(dims.len());
        for (input, output) in dims {
            let weights = r.f64_vec(input * output)?;
            let biases = r.f64_vec(output)?;
            layers.push(DenseLayer {
                input,
                output,
                weights,
                biases,
            });
        }
        nets.push(DenseNetwork::from_layers(layers).map_err(|e| {
            CoreError::Format(format!("checkpoint holds an invalid network: {e}"))
        })?);
    }
    if !r.data.is_empty() {
        return Err(CoreError::Format("trailing bytes after checkpoint".into()));
    }
    Ok((digest, nets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_networks_bit_exactly() {
        let dir = std::env::temp_dir().join("supervisor-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("round_trip.ckpt");

        let actor = DenseNetwork::standard(6, 5, 41).unwrap();
        let critic = DenseNetwork::standard(6, 1, 42).unwrap();
        let digest = config_digest("switch;2;individual;6;5");
        save_checkpoint(&path, digest, &[&actor, &critic]).unwrap();

        let (loaded_digest, nets) = load_checkpoint(&path, Some(digest)).unwrap();
        assert_eq!(loaded_digest, digest);
        assert_eq!(nets.len(), 2);
        assert_eq!(nets[0], actor);
        assert_eq!(nets[1], critic);
    }

    #[test]
    fn digest_mismatch_rejected() {
        let dir = std::env::temp_dir().join("supervisor-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("digest.ckpt");
        let net = DenseNetwork::new(&[2, 2], 0).unwrap();
        save_checkpoint(&path, 7, &[&net]).unwrap();
        assert!(load_checkpoint(&path, Some(8)).is_err());
        assert!(load_checkpoint(&path, Some(7)).is_ok());
        assert!(load_checkpoint(&path, None).is_ok());
    }

    #[test]
    fn garbage_rejected() {
        let dir = std::env::temp_dir().join("supervisor-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("garbage.ckpt");
        std::fs::write(&path, b"definitely not a checkpoint").unwrap();
        assert!(matches!(
            load_checkpoint(&path, None),
            Err(CoreError::Format(_))
        ));
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        assert_eq!(config_digest("a;b;c"), config_digest("a;b;c"));
        assert_ne!(config_digest("a;b;c"), config_digest("a;b;d"));
    }
}
