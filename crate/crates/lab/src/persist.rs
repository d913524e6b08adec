//! Binary ground-state files with a JSON sidecar.
//!
//! Layout (little endian): magic `CMBQCGS\0`, format version, chain spec,
//! solver parameters, convergence record, energy, then either dense
//! amplitudes or MPS tensors.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use cluster_mbqc::ground_state::{Convergence, GroundState, Representation, SolverParams};
use cluster_mbqc::mps::{CanonicalMps, Mps, Tensor3};
use cluster_mbqc::pauli::ChainSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 8] = b"CMBQCGS\0";
pub const FORMAT_VERSION: u32 = 1;

const TAG_DENSE: u8 = 0;
const TAG_MPS: u8 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub n_sites: usize,
    pub alpha: f64,
    pub energy: f64,
    pub representation: String,
    pub max_bond: usize,
    pub converged: bool,
    pub residual: f64,
    pub truncation_error: f64,
    pub sweeps: usize,
    pub sha256: String,
    pub code_version: String,
}

fn bad(msg: impl Into<String>) -> LabError {
    LabError::Format(msg.into())
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    w.write_u64::<LE>(xs.len() as u64)?;
    xs.iter().try_for_each(|&x| w.write_f64::<LE>(x))
}

fn read_len<R: Read>(r: &mut R, limit: u64) -> Result<usize> {
    let n = r.read_u64::<LE>().map_err(|e| bad(e.to_string()))?;
    if n > limit {
        return Err(bad(format!("length {n} exceeds limit {limit}")));
    }
    Ok(n as usize)
}

fn read_f64s<R: Read>(r: &mut R, limit: u64) -> Result<Vec<f64>> {
    let n = read_len(r, limit)?;
    let mut out = vec![0.0; n];
    r.read_f64_into::<LE>(&mut out).map_err(|e| bad(e.to_string()))?;
    Ok(out)
}

pub fn encode(state: &GroundState) -> Vec<u8> {
    let mut w = Vec::new();
    encode_into(state, &mut w).expect("writing to a Vec cannot fail");
    w
}

fn encode_into<W: Write>(state: &GroundState, w: &mut W) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LE>(FORMAT_VERSION)?;
    w.write_u64::<LE>(state.spec.n_sites as u64)?;
    w.write_f64::<LE>(state.spec.alpha)?;

    let p = &state.params;
    w.write_u64::<LE>(p.chi_max as u64)?;
    w.write_u64::<LE>(p.n_sweeps as u64)?;
    w.write_f64::<LE>(p.energy_tol)?;
    w.write_f64::<LE>(p.lanczos_tol)?;
    w.write_u64::<LE>(p.lanczos_max_iter as u64)?;
    w.write_f64::<LE>(p.svd_cutoff)?;

    let c = &state.convergence;
    w.write_u8(c.converged as u8)?;
    w.write_f64::<LE>(c.residual)?;
    w.write_f64::<LE>(c.truncation_error)?;
    write_f64s(w, &c.sweep_energies)?;
    w.write_u8(c.gap.is_some() as u8)?;
    w.write_f64::<LE>(c.gap.unwrap_or(0.0))?;
    w.write_u8(c.near_degenerate as u8)?;

    w.write_f64::<LE>(state.energy)?;
    match &state.representation {
        Representation::Dense(v) => {
            w.write_u8(TAG_DENSE)?;
            w.write_u64::<LE>(v.len() as u64)?;
            for z in v {
                w.write_f64::<LE>(z.re)?;
                w.write_f64::<LE>(z.im)?;
            }
        }
        Representation::Mps(m) => {
            w.write_u8(TAG_MPS)?;
            let tensors = &m.mps().tensors;
            w.write_u64::<LE>(tensors.len() as u64)?;
            for t in tensors {
                w.write_u64::<LE>(t.dl as u64)?;
                w.write_u64::<LE>(t.dr as u64)?;
                write_f64s(w, &t.data)?;
            }
        }
    }
    Ok(())
}

pub fn decode(bytes: &[u8]) -> Result<GroundState> {
    let mut r = bytes;
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
    if &magic != MAGIC {
        return Err(bad("not a ground-state file"));
    }
    let io = |e: std::io::Error| bad(e.to_string());
    let version = r.read_u32::<LE>().map_err(io)?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let n_sites = r.read_u64::<LE>().map_err(io)? as usize;
    let alpha = r.read_f64::<LE>().map_err(io)?;
    let spec = ChainSpec::new(n_sites, alpha)?;

    let params = SolverParams {
        chi_max: r.read_u64::<LE>().map_err(io)? as usize,
        n_sweeps: r.read_u64::<LE>().map_err(io)? as usize,
        energy_tol: r.read_f64::<LE>().map_err(io)?,
        lanczos_tol: r.read_f64::<LE>().map_err(io)?,
        lanczos_max_iter: r.read_u64::<LE>().map_err(io)? as usize,
        svd_cutoff: r.read_f64::<LE>().map_err(io)?,
    };

    let converged = r.read_u8().map_err(io)? != 0;
    let residual = r.read_f64::<LE>().map_err(io)?;
    let truncation_error = r.read_f64::<LE>().map_err(io)?;
    let sweep_energies = read_f64s(&mut r, 1 << 20)?;
    let has_gap = r.read_u8().map_err(io)? != 0;
    let gap = r.read_f64::<LE>().map_err(io)?;
    let near_degenerate = r.read_u8().map_err(io)? != 0;
    let convergence = Convergence {
        converged,
        residual,
        truncation_error,
        sweep_energies,
        gap: has_gap.then_some(gap),
        near_degenerate,
    };

    let energy = r.read_f64::<LE>().map_err(io)?;
    let representation = match r.read_u8().map_err(io)? {
        TAG_DENSE => {
            let len = read_len(&mut r, 1 << 30)?;
            if len != 1usize.checked_shl(n_sites as u32).unwrap_or(0) {
                return Err(bad(format!("dense length {len} does not match {n_sites} sites")));
            }
            let mut v = Vec::with_capacity(len);
            for _ in 0..len {
                let re = r.read_f64::<LE>().map_err(io)?;
                let im = r.read_f64::<LE>().map_err(io)?;
                v.push(Complex64::new(re, im));
            }
            Representation::Dense(v)
        }
        TAG_MPS => {
            let len = read_len(&mut r, 1 << 20)?;
            if len != n_sites {
                return Err(bad(format!("MPS has {len} tensors for {n_sites} sites")));
            }
            let mut tensors = Vec::with_capacity(len);
            for _ in 0..len {
                let dl = r.read_u64::<LE>().map_err(io)? as usize;
                let dr = r.read_u64::<LE>().map_err(io)? as usize;
                let data = read_f64s(&mut r, 1 << 28)?;
                tensors.push(Tensor3 { dl, dr, data });
            }
            Representation::Mps(CanonicalMps::from_left_canonical_checked(Mps { tensors }, 1e-8)?)
        }
        t => return Err(bad(format!("unknown representation tag {t}"))),
    };
    if !r.is_empty() {
        return Err(bad(format!("{} trailing bytes", r.len())));
    }
    Ok(GroundState {
        spec,
        representation,
        energy,
        convergence,
        params,
    })
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn sidecar(state: &GroundState, bytes: &[u8]) -> Sidecar {
    Sidecar {
        format_version: FORMAT_VERSION,
        n_sites: state.n_sites(),
        alpha: state.spec.alpha,
        energy: state.energy,
        representation: if state.is_dense() { "dense" } else { "mps" }.to_string(),
        max_bond: state.max_bond(),
        converged: state.convergence.converged,
        residual: state.convergence.residual,
        truncation_error: state.convergence.truncation_error,
        sweeps: state.convergence.sweep_energies.len(),
        sha256: hex::encode(Sha256::digest(bytes)),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Writes `path` through a temporary file, then the `.json` sidecar.
pub fn save(state: &GroundState, path: &Path) -> Result<()> {
    let bytes = encode(state);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(LabError::io(dir))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let f = fs::File::create(&tmp).map_err(LabError::io(&tmp))?;
        let mut w = BufWriter::new(f);
        w.write_all(&bytes).map_err(LabError::io(&tmp))?;
        w.flush().map_err(LabError::io(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(LabError::io(path))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(&sidecar(state, &bytes))?;
    fs::write(&side, json).map_err(LabError::io(&side))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<GroundState> {
    let f = fs::File::open(path).map_err(LabError::io(path))?;
    let mut bytes = Vec::new();
    BufReader::new(f).read_to_end(&mut bytes).map_err(LabError::io(path))?;
    let side = sidecar_path(path);
    if let Ok(text) = fs::read_to_string(&side) {
        let meta: Sidecar = serde_json::from_str(&text)?;
        if meta.sha256 != hex::encode(Sha256::digest(&bytes)) {
            return Err(bad(format!("checksum mismatch for {}", path.display())));
        }
    }
    decode(&bytes)
}
