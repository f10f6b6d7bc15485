//! Binary checkpoint files for scorer models.
//!
//! Little-endian layout: magic `TDYC`, version `u32` = 1, encoder tag `u8`
//! (0 = features, 1 = cnn), head tag `u8` (0 = bradley-terry), reserved
//! `u16` = 0, `param_count: u64`, parameters as `f32[param_count]`, then the
//! CRC32 of all preceding bytes as `u32`.

use std::path::Path;

use crate::scorer::{EncoderKind, ScorerModel};

pub const MAGIC: [u8; 4] = *b"TDYC";
pub const VERSION: u32 = 1;
/// The only head in this artifact: per-image scalar score compared through
/// a Bradley-Terry probability.
pub const HEAD_TAG_BRADLEY_TERRY: u8 = 0;

/// Errors from reading or writing checkpoints.
#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

/// Serialize a model to checkpoint bytes. Parameters are stored as `f32`;
/// models produced by the trainer are already quantized so this is lossless
/// for them.
pub fn checkpoint_bytes(model: &ScorerModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(20 + model.params.len() * 4 + 4);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(model.encoder.tag());
    out.push(HEAD_TAG_BRADLEY_TERRY);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(model.params.len() as u64).to_le_bytes());
    for &p in &model.params {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

/// Parse checkpoint bytes, verifying magic, version, tags, length and CRC.
pub fn parse_checkpoint(bytes: &[u8]) -> Result<ScorerModel, CheckpointError> {
    const HEADER: usize = 4 + 4 + 1 + 1 + 2 + 8;
    if bytes.len() < HEADER + 4 {
        return Err(CheckpointError::Corrupt("file too short".into()));
    }
    let (body, crc_bytes) = bytes.split_at(bytes.len() - 4);
    let stored_crc = u32::from_le_bytes(crc_bytes.try_into().expect("4 bytes"));
    if crc32fast::hash(body) != stored_crc {
        return Err(CheckpointError::Corrupt("checksum mismatch".into()));
    }
    if body[0..4] != MAGIC {
        return Err(CheckpointError::Corrupt("bad magic".into()));
    }
    let version = u32::from_le_bytes(body[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(CheckpointError::Corrupt(format!("unsupported version {version}")));
    }
    let encoder = EncoderKind::from_tag(body[8])
        .ok_or_else(|| CheckpointError::Corrupt(format!("unknown encoder tag {}", body[8])))?;
    if body[9] != HEAD_TAG_BRADLEY_TERRY {
        return Err(CheckpointError::Corrupt(format!("unknown head tag {}", body[9])));
    }
    let count = u64::from_le_bytes(body[12..20].try_into().expect("8 bytes")) as usize;
    if count != ScorerModel::param_count(encoder) {
        return Err(CheckpointError::Corrupt(format!(
            "param count {count} does not match the {} architecture",
            encoder.name()
        )));
    }
    if body.len() != HEADER + count * 4 {
        return Err(CheckpointError::Corrupt("parameter region truncated".into()));
    }
    let params = body[HEADER..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect::<Vec<f64>>();
    if params.iter().any(|p| !p.is_finite()) {
        return Err(CheckpointError::Corrupt("non-finite parameter".into()));
    }
    Ok(ScorerModel { encoder, params })
}

pub fn save_checkpoint(model: &ScorerModel, path: &Path) -> Result<(), CheckpointError> {
    std::fs::write(path, checkpoint_bytes(model))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ScorerModel, CheckpointError> {
    parse_checkpoint(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::rasterize;
    use crate::rng::make_rng;
    use crate::scene::{ObjectSpec, SceneState};
    use rand::Rng;

    fn quantized_model(seed: u64) -> ScorerModel {
        let mut model = ScorerModel::seeded_uniform(EncoderKind::Features, seed, 0.08);
        model.quantize_f32();
        model
    }

    #[test]
    fn round_trip_preserves_scores_exactly() {
        let model = quantized_model(5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.tdyc");
        save_checkpoint(&model, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, model);

        let mut rng = make_rng(6);
        for k in 0..10u32 {
            let scene = SceneState::new(1.2, 0.8)
                .unwrap()
                .place(
                    &ObjectSpec::new(format!("obj_{k}"), "can", 0.06, 0.06).unwrap(),
                    rng.random_range(0.1..1.1),
                    rng.random_range(0.1..0.7),
                )
                .unwrap();
            let img = rasterize(&scene).unwrap();
            assert_eq!(model.score(&img), loaded.score(&img));
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let bytes = checkpoint_bytes(&quantized_model(7));
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(parse_checkpoint(&bytes[..cut]), Err(CheckpointError::Corrupt(_))));
        }
    }

    #[test]
    fn any_flipped_byte_is_detected() {
        let bytes = checkpoint_bytes(&quantized_model(8));
        let mut rng = make_rng(9);
        for _ in 0..50 {
            let mut corrupted = bytes.clone();
            let at = rng.random_range(0..corrupted.len());
            corrupted[at] ^= 0xA5;
            assert!(
                matches!(parse_checkpoint(&corrupted), Err(CheckpointError::Corrupt(_))),
                "flip at byte {at} went undetected"
            );
        }
    }

    #[test]
    fn wrong_magic_and_version_are_rejected() {
        let model = quantized_model(10);
        let mut bad_magic = checkpoint_bytes(&model);
        bad_magic[0] = b'X';
        // Re-stamp the CRC so only the magic is wrong.
        let body_len = bad_magic.len() - 4;
        let crc = crc32fast::hash(&bad_magic[..body_len]);
        bad_magic[body_len..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(parse_checkpoint(&bad_magic), Err(CheckpointError::Corrupt(_))));
    }
}
