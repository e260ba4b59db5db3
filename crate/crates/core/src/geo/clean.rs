use std::collections::VecDeque;

use crate::geo::graph::{EdgeId, NodeId, RoadGraph};
use crate::geo::GraphError;

/// Output of [`largest_wcc_mapped`]: the cleaned graph plus old-to-new id maps.
#[derive(Clone, Debug)]
pub struct Cleaned {
    pub graph: RoadGraph,
    pub node_map: Vec<Option<NodeId>>,
    pub edge_map: Vec<Option<EdgeId>>,
}

/// Labels every node with the index of its weakly connected component.
/// Components are numbered in order of their smallest node id.
pub fn weak_components(g: &RoadGraph) -> (Vec<usize>, usize) {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        label[root] = count;
        queue.push_back(NodeId(root as u32));
        while let Some(u) = queue.pop_front() {
            let out = g.outgoing(u).iter().map(|&e| g.edge(e).to);
            let inc = g.incoming(u).iter().map(|&e| g.edge(e).from);
            for v in out.chain(inc) {
                if label[v.index()] == usize::MAX {
                    label[v.index()] = count;
                    queue.push_back(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

pub fn largest_wcc(g: &RoadGraph) -> Result<RoadGraph, GraphError> {
    largest_wcc_mapped(g).map(|c| c.graph)
}

/// Keeps only the largest weakly connected component. Among equally large
/// components the one holding the smallest node id wins.
pub fn largest_wcc_mapped(g: &RoadGraph) -> Result<Cleaned, GraphError> {
    if g.node_count() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    let (label, count) = weak_components(g);
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    // Labels follow smallest-node order, so the first maximum is the tie winner.
    let best = (0..count).fold(0, |best, c| if sizes[c] > sizes[best] { c } else { best });
    let keep: Vec<bool> = label.iter().map(|&l| l == best).collect();
    let (graph, node_map, edge_map) = g.retain_nodes(&keep);
    Ok(Cleaned { graph, node_map, edge_map })
}
