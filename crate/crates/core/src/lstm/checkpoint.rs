//! Model checkpoint file, little-endian throughout:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "DRLM"
//!      4     2  format version (u16)
//!      6     2  layer count L (u16)
//!      8     4  input_dim (u32)
//!     12     4  n_classes (u32)
//!     16     1  cell update: 0 standard, 1 swapped
//!     17     1  input domain: 0 time, 1 autocorrelation
//!     18     2  reserved, zero
//!     20   4*L  hidden size per layer (u32)
//! ```
//!
//! followed by f32 tensors: for each layer its stacked gate weights
//! (`4h x (h + in)`, row-major, gate blocks candidate, update, forget,
//! output; columns `[a_prev, x]`) then its bias (`4h`), and finally the head
//! weights (`n_classes x h`) and head bias.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::cell::{CellUpdate, LstmLayer};
use super::input::InputDomain;
use super::model::Model;
use super::LstmError;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"DRLM";
pub const CHECKPOINT_VERSION: u16 = 1;

fn update_code(u: CellUpdate) -> u8 {
    match u {
        CellUpdate::Standard => 0,
        CellUpdate::Swapped => 1,
    }
}

/// Serialize a model to bytes.
pub fn encode_checkpoint(model: &Model<f32>) -> Result<Vec<u8>, LstmError> {
    model.validate()?;
    let bad = |what: &str| LstmError::Checkpoint(format!("{what} does not fit the header field"));
    let n_layers = u16::try_from(model.layers.len()).map_err(|_| bad("layer count"))?;
    let mut out = Vec::with_capacity(20 + 4 * model.param_counts().total());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&n_layers.to_le_bytes());
    let input_dim = u32::try_from(model.input_dim()).map_err(|_| bad("input_dim"))?;
    out.extend_from_slice(&input_dim.to_le_bytes());
    let n_classes = u32::try_from(model.n_classes).map_err(|_| bad("n_classes"))?;
    out.extend_from_slice(&n_classes.to_le_bytes());
    out.push(update_code(model.cell_update));
    out.push(model.input_domain.code());
    out.extend_from_slice(&[0, 0]);
    for l in &model.layers {
        let h = u32::try_from(l.hidden).map_err(|_| bad("hidden size"))?;
        out.extend_from_slice(&h.to_le_bytes());
    }
    for t in model.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<Model<f32>, LstmError> {
    let err = |m: String| LstmError::Checkpoint(m);
    if bytes.len() < 20 {
        return Err(err(format!("file too short for header ({} bytes)", bytes.len())));
    }
    if bytes[..4] != CHECKPOINT_MAGIC {
        return Err(err(format!("bad magic {:?}", &bytes[..4])));
    }
    let u16_at = |o: usize| u16::from_le_bytes([bytes[o], bytes[o + 1]]);
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let version = u16_at(4);
    if version != CHECKPOINT_VERSION {
        return Err(err(format!("unsupported version {version}, expected {CHECKPOINT_VERSION}")));
    }
    let n_layers = u16_at(6) as usize;
    let input_dim = u32_at(8);
    let n_classes = u32_at(12);
    let cell_update = match bytes[16] {
        0 => CellUpdate::Standard,
        1 => CellUpdate::Swapped,
        c => return Err(err(format!("unknown cell update code {c}"))),
    };
    let input_domain = InputDomain::from_code(bytes[17]).ok_or_else(|| err(format!("unknown input domain code {}", bytes[17])))?;
    if n_layers == 0 || input_dim == 0 || n_classes == 0 {
        return Err(err("zero-sized model".into()));
    }
    let dims_end = 20 + 4 * n_layers;
    if bytes.len() < dims_end {
        return Err(err("truncated layer table".into()));
    }
    let mut layers = Vec::with_capacity(n_layers);
    let mut prev = input_dim;
    for i in 0..n_layers {
        let h = u32_at(20 + 4 * i);
        if h == 0 {
            return Err(err(format!("layer {i} has zero cells")));
        }
        layers.push(LstmLayer::zeros(prev, h));
        prev = h;
    }
    let mut model = Model {
        layers,
        head_weights: vec![0.0; n_classes * prev],
        head_bias: vec![0.0; n_classes],
        n_classes,
        cell_update,
        input_domain,
    };
    let expected = dims_end + 4 * model.param_counts().total();
    if bytes.len() != expected {
        return Err(err(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut pos = dims_end;
    for t in model.tensors_mut() {
        for v in t.iter_mut() {
            *v = f32::from_le_bytes(bytes[pos..pos + 4].try_into().expect("4 bytes"));
            pos += 4;
        }
    }
    if let Some(name) = model.first_non_finite() {
        return Err(LstmError::NonFinite(format!("checkpoint {name}")));
    }
    Ok(model)
}

pub fn save_checkpoint(model: &Model<f32>, path: &Path) -> Result<(), LstmError> {
    let bytes = encode_checkpoint(model)?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Model<f32>, LstmError> {
    decode_checkpoint(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lstm::init_model;

    #[test]
    fn roundtrip_bit_exact() {
        let mut m = init_model::<f32>(5, 2, &[6, 3], 4).unwrap();
        m.cell_update = CellUpdate::Swapped;
        m.input_domain = InputDomain::Autocorrelation;
        let bytes = encode_checkpoint(&m).unwrap();
        assert_eq!(bytes.len(), 20 + 8 + 4 * m.param_counts().total());
        assert_eq!(decode_checkpoint(&bytes).unwrap(), m);
    }

    #[test]
    fn header_layout() {
        let m = init_model::<f32>(3, 2, &[4], 0).unwrap();
        let b = encode_checkpoint(&m).unwrap();
        assert_eq!(&b[..4], b"DRLM");
        assert_eq!(u16::from_le_bytes([b[4], b[5]]), 1);
        assert_eq!(u16::from_le_bytes([b[6], b[7]]), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 4);
        // first weight follows the layer table
        assert_eq!(f32::from_le_bytes(b[24..28].try_into().unwrap()), m.layers[0].weights[0]);
    }

    #[test]
    fn rejects_corruption() {
        let m = init_model::<f32>(3, 2, &[4], 0).unwrap();
        let b = encode_checkpoint(&m).unwrap();
        let mut bad = b.clone();
        bad[0] = b'X';
        assert!(decode_checkpoint(&bad).is_err());
        let mut bad = b.clone();
        bad[4] = 9;
        assert!(decode_checkpoint(&bad).is_err());
        assert!(decode_checkpoint(&b[..b.len() - 1]).is_err());
        assert!(decode_checkpoint(&b[..10]).is_err());
        let mut bad = b.clone();
        let n = bad.len();
        bad[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(decode_checkpoint(&bad), Err(LstmError::NonFinite(_))));
    }
}
