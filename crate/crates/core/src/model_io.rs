//! Model files.
//!
//! Layout, all integers `u32` and all reals `f64`, little-endian:
//!
//! ```text
//! "XLDM" | version | M | C | K⁰ | K¹ … K^C | K atoms of M values | β λ γ | u8 classifier
//! ```
//!
//! The classifier byte is 0 for GCC and 1 for LCC.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::classify::{ClassifierKind, Model};
use crate::dictionary::{LabelLayout, StructuredDictionary};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"XLDM";
pub const MODEL_VERSION: u32 = 1;

pub fn model_to_bytes(model: &Model) -> Vec<u8> {
    let d = model.dictionary();
    let layout = d.layout();
    let mut out = Vec::with_capacity(32 + 8 * d.atoms().len());
    out.extend_from_slice(MODEL_MAGIC);
    let header = [MODEL_VERSION, d.dim() as u32, layout.num_classes() as u32, layout.shared_count() as u32];
    for v in header.into_iter().chain(layout.particular_counts().iter().map(|&k| k as u32)) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in d.atoms().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in [model.beta(), model.lambda(), model.gamma()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(model.classifier().tag());
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let slice = self
            .buf
            .get(self.at..self.at + n)
            .ok_or_else(|| Error::InvalidModel(format!("truncated at byte {}", self.at)))?;
        self.at += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn model_from_bytes(buf: &[u8]) -> Result<Model> {
    let mut cur = Cursor { buf, at: 0 };
    if cur.take(4)? != MODEL_MAGIC {
        return Err(Error::InvalidModel("missing `XLDM` magic".into()));
    }
    let version = cur.u32()?;
    if version != MODEL_VERSION as usize {
        return Err(Error::InvalidModel(format!("unsupported version {version}")));
    }
    let dim = cur.u32()?;
    let classes = cur.u32()?;
    let shared = cur.u32()?;
    let per_class = (0..classes).map(|_| cur.u32()).collect::<Result<Vec<_>>>()?;
    let layout = LabelLayout::new(shared, per_class)?;
    let k = layout.num_atoms();
    let expected = cur.at + 8 * dim * k + 3 * 8 + 1;
    if buf.len() != expected {
        return Err(Error::InvalidModel(format!(
            "expected {expected} bytes for M={dim}, K={k}; file has {}",
            buf.len()
        )));
    }
    let values = (0..dim * k).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
    let dictionary = StructuredDictionary::new(DMatrix::from_vec(dim, k, values), layout)?;
    let (beta, lambda, gamma) = (cur.f64()?, cur.f64()?, cur.f64()?);
    let tag = cur.take(1)?[0];
    let kind = ClassifierKind::from_tag(tag)
        .ok_or_else(|| Error::InvalidModel(format!("unknown classifier tag {tag}")))?;
    Model::new(dictionary, beta, lambda, gamma, kind)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    model_from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model() -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let layout = LabelLayout::new(2, vec![1, 3]).unwrap();
        let raw = DMatrix::from_fn(5, 6, |_, _| rng.random::<f64>() - 0.5);
        let d = StructuredDictionary::from_unnormalized(raw, layout).unwrap();
        Model::new(d, 4e-3, 2e3, 1.0, ClassifierKind::Lcc).unwrap()
    }

    #[test]
    fn byte_layout() {
        let m = model();
        let bytes = model_to_bytes(&m);
        assert_eq!(&bytes[..4], b"XLDM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 2);
        assert_eq!(bytes.len(), 4 + 4 * 4 + 2 * 4 + 8 * 30 + 24 + 1);
        assert_eq!(*bytes.last().unwrap(), 1);
        let back = model_from_bytes(&bytes).unwrap();
        assert_eq!(back.dictionary(), m.dictionary());
        assert_eq!((back.beta(), back.lambda(), back.gamma()), (4e-3, 2e3, 1.0));
        assert_eq!(back.classifier(), ClassifierKind::Lcc);
    }

    #[test]
    fn corrupt_files() {
        let bytes = model_to_bytes(&model());
        assert!(model_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'Y';
        assert!(model_from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() = 7;
        assert!(model_from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(model_from_bytes(&bad).is_err());
    }
}
