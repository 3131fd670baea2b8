use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{GraphEdge, GraphNode, NodeId, SceneGraph};

/// One change between two revisions, for NDJSON event logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum GraphEvent {
    AddNode { revision: u64, node: GraphNode },
    UpdateNode { revision: u64, node: GraphNode },
    RemoveNode { revision: u64, id: NodeId },
    AddEdge { revision: u64, edge: GraphEdge },
    RemoveEdge { revision: u64, edge: GraphEdge },
}

/// Events turning `old` into `new`: edge and node removals first, then node
/// additions and updates, then edge additions, each in graph order.
pub fn diff(old: &SceneGraph, new: &SceneGraph) -> Vec<GraphEvent> {
    let revision = new.revision;
    let mut out = Vec::new();
    for e in old.edges.difference(&new.edges) {
        out.push(GraphEvent::RemoveEdge { revision, edge: *e });
    }
    for id in old.nodes.keys().filter(|id| !new.nodes.contains_key(id)) {
        out.push(GraphEvent::RemoveNode { revision, id: *id });
    }
    for (id, node) in &new.nodes {
        match old.nodes.get(id) {
            None => out.push(GraphEvent::AddNode { revision, node: node.clone() }),
            Some(prev) if prev != node => {
                out.push(GraphEvent::UpdateNode { revision, node: node.clone() })
            }
            Some(_) => {}
        }
    }
    for e in new.edges.difference(&old.edges) {
        out.push(GraphEvent::AddEdge { revision, edge: *e });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::chain;
    use super::super::Layer;
    use super::*;
    use crate::model::Point3;

    #[test]
    fn diff_from_empty_adds_everything() {
        let g = chain();
        let ev = diff(&SceneGraph::new(), &g);
        let adds = ev.iter().filter(|e| matches!(e, GraphEvent::AddNode { .. })).count();
        let edges = ev.iter().filter(|e| matches!(e, GraphEvent::AddEdge { .. })).count();
        assert_eq!((adds, edges, ev.len()), (4, 3, 7));
        assert!(diff(&g, &g).is_empty());
    }

    #[test]
    fn moved_node_is_an_update() {
        let old = chain();
        let mut new = old.clone();
        let id = NodeId::new(Layer::Object, 1);
        let mut n = new.node(&id).unwrap().clone();
        n.position = Point3::new(5.0, 5.0, 0.0);
        new.add_node(n);
        let ev = diff(&old, &new);
        assert_eq!(ev.len(), 1);
        assert!(matches!(&ev[0], GraphEvent::UpdateNode { node, .. } if node.id == id));
        let line = serde_json::to_string(&ev[0]).unwrap();
        assert!(line.starts_with("{\"event\":\"update_node\""));
    }
}
