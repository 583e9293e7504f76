use super::{ExamplePolicy, ReasonerError, TaskKind, NEGATIVE, POSITIVE};
use crate::memory::{retrieve_similar, EmbeddingVector, MemoryRecord, MemoryStore};
use crate::rng::{derive_seed, SplitMix64};
use crate::sample::SampleId;

#[derive(Debug, Clone, PartialEq)]
pub struct Pick {
    pub sample_id: SampleId,
    pub label: String,
    pub similarity: Option<f64>,
}

/// Memory records chosen for one target, before re-encoding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Selection {
    pub picks: Vec<Pick>,
    pub positives: usize,
    pub negatives: usize,
    pub shortfall: bool,
}

fn pick(r: &MemoryRecord, similarity: Option<f64>) -> Pick {
    Pick {
        sample_id: r.sample_id.clone(),
        label: r.label.clone(),
        similarity,
    }
}

/// Node targets get the most similar other records. Link targets get the
/// most similar positives plus seeded random negatives, skipping any edge
/// that touches either target endpoint.
pub fn select_examples(
    store: &MemoryStore,
    target: &SampleId,
    query: &EmbeddingVector,
    kind: TaskKind,
    policy: &ExamplePolicy,
    seed: u64,
) -> Result<Selection, ReasonerError> {
    if store.is_empty() {
        return Err(ReasonerError::EmptyStore);
    }
    let mut out = Selection::default();
    match kind {
        TaskKind::NodeClassification => {
            if policy.node_examples > 0 {
                let r = retrieve_similar(store, query, policy.node_examples, |r| &r.sample_id != target)?;
                out.shortfall = r.short;
                out.picks = r.hits.iter().map(|h| pick(h.record, Some(h.similarity))).collect();
            }
        }
        TaskKind::LinkPrediction => {
            let disjoint = |r: &MemoryRecord| !r.sample_id.shares_node_with(target);
            if policy.positives > 0 {
                let r = retrieve_similar(store, query, policy.positives, |r| r.label == POSITIVE && disjoint(r))?;
                out.shortfall |= r.short;
                out.picks.extend(r.hits.iter().map(|h| pick(h.record, Some(h.similarity))));
            }
            out.positives = out.picks.len();

            let pool: Vec<&MemoryRecord> =
                store.records().iter().filter(|r| r.label == NEGATIVE && disjoint(r)).collect();
            let mut rng = SplitMix64::new(derive_seed(seed, &target.to_string()));
            let chosen = rng.choose_indices(pool.len(), policy.negatives.min(pool.len()));
            out.shortfall |= chosen.len() < policy.negatives;
            out.negatives = chosen.len();
            out.picks.extend(chosen.into_iter().map(|i| pick(pool[i], None)));
        }
    }
    Ok(out)
}

/// One example set for a whole k-shot run: random records for node tasks,
/// random positives and negatives for link tasks.
pub fn choose_fixed_examples(store: &MemoryStore, kind: TaskKind, policy: &ExamplePolicy, seed: u64) -> Selection {
    let mut rng = SplitMix64::new(derive_seed(seed, "fixed-examples"));
    let mut out = Selection::default();
    let mut draw = |records: Vec<&MemoryRecord>, count: usize, out: &mut Selection| {
        let chosen = rng.choose_indices(records.len(), count.min(records.len()));
        out.shortfall |= chosen.len() < count;
        let n = chosen.len();
        out.picks.extend(chosen.into_iter().map(|i| pick(records[i], None)));
        n
    };
    match kind {
        TaskKind::NodeClassification => {
            draw(store.records().iter().collect(), policy.node_examples, &mut out);
        }
        TaskKind::LinkPrediction => {
            let pos = store.records().iter().filter(|r| r.label == POSITIVE).collect();
            out.positives = draw(pos, policy.positives, &mut out);
            let neg = store.records().iter().filter(|r| r.label == NEGATIVE).collect();
            out.negatives = draw(neg, policy.negatives, &mut out);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::Provenance;
    use crate::sample::SampleKind;

    fn store(recs: &[(SampleId, [f32; 2], &str)]) -> MemoryStore {
        let mut s = MemoryStore::new(2, Provenance::LmEmbedding);
        for (id, v, label) in recs {
            s.insert(MemoryRecord {
                sample_id: id.clone(),
                kind: SampleKind::Edge,
                vector: EmbeddingVector::new(v.to_vec()).unwrap(),
                label: label.to_string(),
                encoded_text: String::new(),
            })
            .unwrap();
        }
        s
    }

    fn q() -> EmbeddingVector {
        EmbeddingVector::new(vec![1.0, 0.0]).unwrap()
    }

    #[test]
    fn shared_endpoint_is_filtered() {
        let s = store(&[
            (SampleId::edge("d1", "g7"), [1.0, 0.0], POSITIVE),
            (SampleId::edge("d2", "g2"), [0.9, 0.1], POSITIVE),
            (SampleId::edge("d3", "g3"), [0.5, 0.5], NEGATIVE),
        ]);
        let sel = select_examples(&s, &SampleId::edge("d1", "g1"), &q(), TaskKind::LinkPrediction, &ExamplePolicy::default(), 0)
            .unwrap();
        let ids: Vec<String> = sel.picks.iter().map(|p| p.sample_id.to_string()).collect();
        assert_eq!(ids, ["(d2, g2)", "(d3, g3)"]);
        assert!(sel.shortfall);
        assert_eq!((sel.positives, sel.negatives), (1, 1));
    }

    #[test]
    fn exact_policy_and_seeded_negatives() {
        let mut recs = Vec::new();
        for i in 0..3 {
            recs.push((SampleId::edge(format!("p{i}"), format!("q{i}")), [1.0, i as f32], POSITIVE));
        }
        for i in 0..6 {
            recs.push((SampleId::edge(format!("n{i}"), format!("m{i}")), [0.0, 1.0 + i as f32], NEGATIVE));
        }
        let s = store(&recs);
        let t = SampleId::edge("x", "y");
        let a = select_examples(&s, &t, &q(), TaskKind::LinkPrediction, &ExamplePolicy::default(), 9).unwrap();
        let b = select_examples(&s, &t, &q(), TaskKind::LinkPrediction, &ExamplePolicy::default(), 9).unwrap();
        assert_eq!(a, b);
        assert_eq!((a.positives, a.negatives, a.shortfall), (3, 2, false));
        assert!(a.picks[3..].iter().all(|p| p.label == NEGATIVE));
    }

    #[test]
    fn node_target_excluded_and_empty_store() {
        let mut s = MemoryStore::new(2, Provenance::LmEmbedding);
        for (id, v) in [("a", [1.0, 0.0]), ("b", [0.8, 0.2])] {
            s.insert(MemoryRecord {
                sample_id: SampleId::node(id),
                kind: SampleKind::Node,
                vector: EmbeddingVector::new(v.to_vec()).unwrap(),
                label: "X".into(),
                encoded_text: String::new(),
            })
            .unwrap();
        }
        let sel = select_examples(&s, &SampleId::node("a"), &q(), TaskKind::NodeClassification, &ExamplePolicy::default(), 0)
            .unwrap();
        assert_eq!(sel.picks.len(), 1);
        assert_eq!(sel.picks[0].sample_id, SampleId::node("b"));
        let empty = MemoryStore::new(2, Provenance::LmEmbedding);
        assert!(matches!(
            select_examples(&empty, &SampleId::node("a"), &q(), TaskKind::NodeClassification, &ExamplePolicy::default(), 0),
            Err(ReasonerError::EmptyStore)
        ));
    }
}
