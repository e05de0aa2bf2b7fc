//! Binary parameter files: magic `RIGANN01`, u32 version, 32-byte spec
//! hash, u64 parameter count, little-endian f64 parameters. A JSON sidecar
//! next to the file holds the spec.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{NnError, Result};
use crate::network::{Network, NetworkSpec};

pub const MAGIC: &[u8; 8] = b"RIGANN01";
pub const VERSION: u32 = 1;

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(net: &Network) -> Vec<u8> {
    let params = net.params();
    let mut out = Vec::with_capacity(52 + params.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&net.spec().hash());
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], spec: NetworkSpec) -> Result<Network> {
    let bad = |m: &str| NnError::Checkpoint(m.to_string());
    if bytes.len() < 52 || &bytes[..8] != MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    if bytes[12..44] != spec.hash() {
        return Err(bad("spec hash does not match"));
    }
    let count = u64::from_le_bytes(bytes[44..52].try_into().unwrap()) as usize;
    if bytes.len() != 52 + count * 8 {
        return Err(bad("truncated parameter array"));
    }
    let params: Vec<f64> = bytes[52..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let mut net = Network::new(spec)?;
    net.set_params(&params)?;
    Ok(net)
}

pub fn save(net: &Network, path: &Path) -> Result<()> {
    fs::write(path, encode(net))?;
    let sidecar = serde_json::json!({
        "format": "RIGANN01",
        "version": VERSION,
        "spec_sha256": hex::encode(net.spec().hash()),
        "param_count": net.param_count(),
        "spec": net.spec(),
    });
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Network> {
    let sidecar: serde_json::Value = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    let spec: NetworkSpec = serde_json::from_value(sidecar["spec"].clone())?;
    decode(&fs::read(path)?, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::LayerSpec;

    #[test]
    fn round_trip() {
        let spec = NetworkSpec::new(vec![3], vec![LayerSpec::Dense { input: 3, output: 2 }], 9);
        let net = Network::new(spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.bin");
        save(&net, &p).unwrap();
        assert_eq!(load(&p).unwrap(), net);
    }

    #[test]
    fn wrong_spec_rejected() {
        let a = Network::new(NetworkSpec::new(vec![3], vec![LayerSpec::Dense { input: 3, output: 2 }], 9)).unwrap();
        let other = NetworkSpec::new(vec![3], vec![LayerSpec::Dense { input: 3, output: 2 }], 10);
        assert!(decode(&encode(&a), other).is_err());
    }
}
