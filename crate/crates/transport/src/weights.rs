use fednod_core::{Arch, ModelWeights, Tensor32};

use crate::error::{Result, TransportError};

pub const MAX_RANK: usize = 8;

/// Body of a CLIENT_UPDATE message.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdatePayload {
    pub n_samples: u64,
    pub train_loss: f32,
    pub train_accuracy: f32,
    pub tensors: Vec<(String, Tensor32)>,
}

fn put_tensors(out: &mut Vec<u8>, tensors: &[(String, Tensor32)]) -> Result<()> {
    let count = u32::try_from(tensors.len()).map_err(|_| TransportError::Encode("too many tensors".into()))?;
    out.extend_from_slice(&count.to_le_bytes());
    for (name, t) in tensors {
        let name_len = u16::try_from(name.len())
            .map_err(|_| TransportError::Encode(format!("tensor name of {} bytes exceeds 65535", name.len())))?;
        if t.rank() > MAX_RANK {
            return Err(TransportError::Encode(format!("{name}: rank {} exceeds {MAX_RANK}", t.rank())));
        }
        out.extend_from_slice(&name_len.to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.push(t.rank() as u8);
        for &d in t.shape() {
            let d = u32::try_from(d).map_err(|_| TransportError::Encode(format!("{name}: dimension {d} too large")))?;
            out.extend_from_slice(&d.to_le_bytes());
        }
        out.reserve(4 * t.len());
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(())
}

/// Weights payload for a list of named tensors.
pub fn encode_tensors(tensors: &[(String, Tensor32)]) -> Result<Vec<u8>> {
    let bytes: usize = tensors.iter().map(|(n, t)| 7 + n.len() + 4 * (t.rank() + t.len())).sum();
    let mut out = Vec::with_capacity(4 + bytes);
    put_tensors(&mut out, tensors)?;
    Ok(out)
}

/// Tensors are named `"<layer>.<param>"`; the architecture is not sent.
pub fn encode_weights(weights: &ModelWeights) -> Result<Vec<u8>> {
    let named: Vec<(String, Tensor32)> = weights.entries.iter().map(|e| (e.name(), e.tensor.clone())).collect();
    encode_tensors(&named)
}

pub fn encode_update(update: &UpdatePayload) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(16);
    out.extend_from_slice(&update.n_samples.to_le_bytes());
    out.extend_from_slice(&update.train_loss.to_le_bytes());
    out.extend_from_slice(&update.train_accuracy.to_le_bytes());
    put_tensors(&mut out, &update.tensors)?;
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(TransportError::decode(
                self.pos,
                format!("truncated {what}: need {n} bytes, {remaining} left"),
            ));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        Ok(self.take(N, what)?.try_into().unwrap())
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16> {
        self.array(what).map(u16::from_le_bytes)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.array(what).map(u32::from_le_bytes)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        self.array(what).map(u64::from_le_bytes)
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        self.array(what).map(f32::from_le_bytes)
    }

    fn tensors(&mut self) -> Result<Vec<(String, Tensor32)>> {
        let count = self.u32("tensor count")?;
        let mut out = Vec::with_capacity(count.min(1024) as usize);
        for _ in 0..count {
            let name_len = self.u16("name length")? as usize;
            let at = self.pos;
            let name = std::str::from_utf8(self.take(name_len, "tensor name")?)
                .map_err(|e| TransportError::decode(at + e.valid_up_to(), "tensor name is not UTF-8"))?
                .to_string();
            let rank_at = self.pos;
            let rank = self.u8("rank")? as usize;
            if rank > MAX_RANK {
                return Err(TransportError::decode(rank_at, format!("rank {rank} exceeds {MAX_RANK}")));
            }
            let dims_at = self.pos;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(self.u32("dimension")? as usize);
            }
            let len = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .and_then(|n| n.checked_mul(4))
                .ok_or_else(|| TransportError::decode(dims_at, format!("{name}: shape {shape:?} overflows")))?;
            let data = self
                .take(len, "tensor data")?
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            out.push((name, Tensor32::new(shape, data).expect("length derived from shape")));
        }
        Ok(out)
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(TransportError::decode(
                self.pos,
                format!("{} bytes after the last tensor", self.buf.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn decode_tensors(bytes: &[u8]) -> Result<Vec<(String, Tensor32)>> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let tensors = r.tensors()?;
    r.finish()?;
    Ok(tensors)
}

pub fn decode_weights(bytes: &[u8], arch: Arch) -> Result<ModelWeights> {
    Ok(ModelWeights::from_named(arch, decode_tensors(bytes)?)?)
}

pub fn decode_update(bytes: &[u8]) -> Result<UpdatePayload> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let n_samples = r.u64("n_samples")?;
    let train_loss = r.f32("train loss")?;
    let train_accuracy = r.f32("train accuracy")?;
    let tensors = r.tensors()?;
    r.finish()?;
    Ok(UpdatePayload {
        n_samples,
        train_loss,
        train_accuracy,
        tensors,
    })
}
