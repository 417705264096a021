use super::params::{param_count, ModelDims, ModelParams};
use super::NnError;

const MAGIC: &[u8; 4] = b"VLFM";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 6 * 4;

/// Payload size in bytes: four bytes per parameter.
pub fn payload_bytes(dims: &ModelDims) -> usize {
    4 * param_count(dims)
}

/// Full file size: header plus payload.
pub fn serialized_len(dims: &ModelDims) -> usize {
    HEADER_LEN + payload_bytes(dims)
}

/// Little-endian wire format: magic, version, the six dimensions as u32,
/// then every parameter as f32 in canonical block order. This is the unit
/// of transfer in federated rounds.
pub fn serialize_params(params: &ModelParams) -> Vec<u8> {
    let d = &params.dims;
    let mut out = Vec::with_capacity(serialized_len(d));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [d.input, d.hidden, d.embed, d.dense, d.output, d.vocab] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for block in params.block_slices() {
        for v in block {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    out
}

pub fn deserialize_params(bytes: &[u8]) -> Result<ModelParams, NnError> {
    if bytes.len() < HEADER_LEN {
        return Err(NnError::Format("file shorter than header".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(NnError::Format("bad magic".into()));
    }
    let u32_at = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(NnError::Format(format!("unsupported version {version}")));
    }
    let dims = ModelDims {
        input: u32_at(8) as usize,
        hidden: u32_at(12) as usize,
        embed: u32_at(16) as usize,
        dense: u32_at(20) as usize,
        output: u32_at(24) as usize,
        vocab: u32_at(28) as usize,
    };
    dims.validate()
        .map_err(|e| NnError::Format(format!("bad dimensions: {e}")))?;
    let expected = serialized_len(&dims);
    if bytes.len() != expected {
        return Err(NnError::Format(format!(
            "expected {expected} bytes for {dims:?}, found {}",
            bytes.len()
        )));
    }
    let mut params = ModelParams::zeros(dims);
    let mut off = HEADER_LEN;
    for block in params.block_slices_mut() {
        for v in block.iter_mut() {
            let raw = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            if !raw.is_finite() {
                return Err(NnError::Format(format!(
                    "non-finite parameter at byte {off}"
                )));
            }
            *v = raw as f64;
            off += 4;
        }
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::test_support::tiny_dims;

    #[test]
    fn vocab10_standard_shape_sizes() {
        let dims = ModelDims::standard(10);
        assert_eq!(param_count(&dims), 553_712);
        assert_eq!(payload_bytes(&dims), 2_214_848);
        assert_eq!(serialized_len(&dims), 2_214_848 + 32);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let params = ModelParams::init(tiny_dims(), 77);
        let bytes = serialize_params(&params);
        assert_eq!(bytes.len(), serialized_len(&tiny_dims()));
        let back = deserialize_params(&bytes).unwrap();
        assert_eq!(back, params);
        // byte-level round trip as well
        assert_eq!(serialize_params(&back), bytes);
    }

    #[test]
    fn truncated_and_corrupted_input_rejected() {
        let params = ModelParams::init(tiny_dims(), 77);
        let bytes = serialize_params(&params);
        assert!(deserialize_params(&bytes[..bytes.len() - 1]).is_err());
        assert!(deserialize_params(&bytes[..10]).is_err());
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'Z';
        assert!(deserialize_params(&bad_magic).is_err());
        let mut bad_dims = bytes.clone();
        bad_dims[8] = 0;
        bad_dims[9] = 0;
        bad_dims[10] = 0;
        bad_dims[11] = 0;
        assert!(deserialize_params(&bad_dims).is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let params = ModelParams::init(tiny_dims(), 77);
        let mut bytes = serialize_params(&params);
        bytes.push(0);
        assert!(deserialize_params(&bytes).is_err());
    }
}
