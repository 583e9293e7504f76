//! On-disk layout: `vectors.f32` holds every record's vector as consecutive
//! little-endian f32 values in record order; `store.json` holds dim,
//! provenance and per-record metadata.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EmbeddingVector, MemoryError, MemoryRecord, MemoryStore, Provenance};
use crate::sample::{SampleId, SampleKind};

pub const VECTORS_FILE: &str = "vectors.f32";
pub const SIDECAR_FILE: &str = "store.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Sidecar {
    format_version: u32,
    dim: usize,
    provenance: Provenance,
    count: usize,
    records: Vec<RecordMeta>,
}

#[derive(Serialize, Deserialize)]
struct RecordMeta {
    sample_id: SampleId,
    kind: SampleKind,
    label: String,
    encoded_text: String,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> MemoryError + '_ {
    move |source| MemoryError::Io {
        path: path.display().to_string(),
        source,
    }
}

impl MemoryStore {
    pub fn save(&self, dir: &Path) -> Result<(), MemoryError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut bytes = Vec::with_capacity(self.records.len() * self.dim * 4);
        for r in &self.records {
            for v in r.vector.values() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        let vectors = dir.join(VECTORS_FILE);
        fs::write(&vectors, bytes).map_err(io_err(&vectors))?;

        let sidecar = Sidecar {
            format_version: FORMAT_VERSION,
            dim: self.dim,
            provenance: self.provenance,
            count: self.records.len(),
            records: self
                .records
                .iter()
                .map(|r| RecordMeta {
                    sample_id: r.sample_id.clone(),
                    kind: r.kind,
                    label: r.label.clone(),
                    encoded_text: r.encoded_text.clone(),
                })
                .collect(),
        };
        let meta = dir.join(SIDECAR_FILE);
        let json = serde_json::to_vec_pretty(&sidecar).map_err(|e| MemoryError::Format(e.to_string()))?;
        fs::write(&meta, json).map_err(io_err(&meta))
    }

    pub fn load(dir: &Path) -> Result<Self, MemoryError> {
        let meta = dir.join(SIDECAR_FILE);
        let sidecar: Sidecar = serde_json::from_slice(&fs::read(&meta).map_err(io_err(&meta))?)
            .map_err(|e| MemoryError::Format(format!("{}: {e}", meta.display())))?;
        if sidecar.format_version != FORMAT_VERSION {
            return Err(MemoryError::Format(format!("unsupported format version {}", sidecar.format_version)));
        }
        if sidecar.count != sidecar.records.len() {
            return Err(MemoryError::Format("record count does not match metadata".into()));
        }
        let vectors = dir.join(VECTORS_FILE);
        let bytes = fs::read(&vectors).map_err(io_err(&vectors))?;
        if bytes.len() != sidecar.count * sidecar.dim * 4 {
            return Err(MemoryError::Format(format!(
                "{} has {} bytes, expected {}",
                vectors.display(),
                bytes.len(),
                sidecar.count * sidecar.dim * 4
            )));
        }
        let mut store = MemoryStore::new(sidecar.dim, sidecar.provenance);
        let row_bytes = sidecar.dim * 4;
        for (i, meta) in sidecar.records.into_iter().enumerate() {
            let row = &bytes[i * row_bytes..(i + 1) * row_bytes];
            let values = row
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            store.insert(MemoryRecord {
                sample_id: meta.sample_id,
                kind: meta.kind,
                vector: EmbeddingVector::new(values)?,
                label: meta.label,
                encoded_text: meta.encoded_text,
            })?;
        }
        Ok(store)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(rows in proptest::collection::vec(proptest::collection::vec(-1e30f32..1e30, 3), 1..20)) {
            let mut store = MemoryStore::new(3, Provenance::GnnEmbedding);
            for (i, row) in rows.iter().enumerate() {
                let vector = EmbeddingVector::new(row.clone()).unwrap();
                prop_assume!(vector.norm() > 0.0);
                store.insert(MemoryRecord {
                    sample_id: SampleId::edge(format!("a{i}"), "b"),
                    kind: SampleKind::Edge,
                    vector,
                    label: if i % 2 == 0 { "positive".into() } else { "negative".into() },
                    encoded_text: format!("edge: (a{i}, b)\nline two"),
                }).unwrap();
            }
            let dir = tempfile::tempdir().unwrap();
            store.save(dir.path()).unwrap();
            let back = MemoryStore::load(dir.path()).unwrap();
            for (a, b) in store.records().iter().zip(back.records()) {
                let abits: Vec<u32> = a.vector.values().iter().map(|v| v.to_bits()).collect();
                let bbits: Vec<u32> = b.vector.values().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(abits, bbits);
            }
            prop_assert_eq!(&back, &store);
            let dir2 = tempfile::tempdir().unwrap();
            back.save(dir2.path()).unwrap();
            prop_assert_eq!(fs::read(dir.path().join(VECTORS_FILE)).unwrap(), fs::read(dir2.path().join(VECTORS_FILE)).unwrap());
            prop_assert_eq!(fs::read(dir.path().join(SIDECAR_FILE)).unwrap(), fs::read(dir2.path().join(SIDECAR_FILE)).unwrap());
        }
    }

    #[test]
    fn truncated_vector_file_rejected() {
        let mut store = MemoryStore::new(2, Provenance::LmEmbedding);
        store
            .insert(MemoryRecord {
                sample_id: SampleId::node("a"),
                kind: SampleKind::Node,
                vector: EmbeddingVector::new(vec![1.0, 2.0]).unwrap(),
                label: "x".into(),
                encoded_text: "t".into(),
            })
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        store.save(dir.path()).unwrap();
        fs::write(dir.path().join(VECTORS_FILE), [0u8; 4]).unwrap();
        assert!(matches!(MemoryStore::load(dir.path()), Err(MemoryError::Format(_))));
    }
}
