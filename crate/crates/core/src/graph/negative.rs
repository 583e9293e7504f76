use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};
use crate::rng::SplitMix64;

/// A candidate `(src, dst)` pair with its link-prediction label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EdgeSample {
    pub src: NodeId,
    pub dst: NodeId,
    pub positive: bool,
}

/// Draws `count` distinct `(src_type, dst_type)` pairs that are not joined
/// by any edge of any type. Pairs are drawn uniformly by rejection; when
/// more than half of the free pairs are requested the free set is
/// enumerated and sampled without replacement instead.
pub fn sample_negative_edges(
    g: &Graph,
    src_type: &str,
    dst_type: &str,
    count: usize,
    seed: u64,
) -> Result<Vec<EdgeSample>, GraphError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let sources: Vec<&NodeId> = g.nodes_of_type(src_type).map(|n| &n.id).collect();
    let targets: Vec<&NodeId> = g.nodes_of_type(dst_type).map(|n| &n.id).collect();

    let mut taken = 0usize;
    for s in &sources {
        let distinct: HashSet<&NodeId> = g
            .n_hop_neighbors(s, 1)?
            .iter()
            .filter_map(|(n, _)| g.node(n))
            .filter(|n| n.node_type == dst_type)
            .map(|n| &n.id)
            .collect();
        taken += distinct.len();
    }
    let self_pairs = if src_type == dst_type { sources.len() } else { 0 };
    let available = sources.len() * targets.len() - self_pairs - taken;
    if count > available {
        return Err(GraphError::InsufficientNegativeSpace {
            requested: count,
            available,
        });
    }

    let mut rng = SplitMix64::new(seed);
    let make = |s: &NodeId, d: &NodeId| EdgeSample {
        src: s.clone(),
        dst: d.clone(),
        positive: false,
    };
    let is_free = |s: &NodeId, d: &NodeId| s != d && !g.has_edge_between(s, d);

    if count * 2 > available {
        let free: Vec<(&NodeId, &NodeId)> = sources
            .iter()
            .flat_map(|s| targets.iter().map(move |d| (*s, *d)))
            .filter(|(s, d)| is_free(s, d))
            .collect();
        return Ok(rng
            .choose_indices(free.len(), count)
            .into_iter()
            .map(|i| make(free[i].0, free[i].1))
            .collect());
    }

    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let si = rng.below(sources.len());
        let di = rng.below(targets.len());
        if !is_free(sources[si], targets[di]) || !chosen.insert((si, di)) {
            continue;
        }
        out.push(make(sources[si], targets[di]));
    }
    Ok(out)
}
