//! The four-layer scene graph: buildings contain rooms, rooms contain
//! scenes, scenes contain objects.

mod builder;
mod events;
mod link;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::Point3;

pub use builder::{GraphBuilder, GraphInputs};
pub use events::{diff, GraphEvent};
pub use link::{cluster_buildings, link_objects_to_scenes, link_scenes_to_rooms, BUILDING_DILATION_PX};

/// Version of the JSON document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Index used by the placeholder node of each layer.
pub const PLACEHOLDER_INDEX: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Building,
    Room,
    Scene,
    Object,
}

impl Layer {
    pub const ALL: [Layer; 4] = [Layer::Building, Layer::Room, Layer::Scene, Layer::Object];

    /// 0 for buildings up to 3 for objects.
    pub fn depth(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Layer::Building => "building",
            Layer::Room => "room",
            Layer::Scene => "scene",
            Layer::Object => "object",
        }
    }

    pub fn parent(self) -> Option<Layer> {
        match self {
            Layer::Building => None,
            Layer::Room => Some(Layer::Building),
            Layer::Scene => Some(Layer::Room),
            Layer::Object => Some(Layer::Scene),
        }
    }

    /// Attribute keys every node of this layer carries.
    pub fn required_attributes(self) -> &'static [&'static str] {
        match self {
            Layer::Building => &["building_index", "room_count"],
            Layer::Room => &["mask_id", "area_m2"],
            Layer::Scene => &["scene_type", "indoor_outdoor", "stamp"],
            Layer::Object => &["class_name", "class_id", "support", "first_seen", "last_seen"],
        }
    }
}

/// Node identifier, written as `"<layer>/<index>"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub layer: Layer,
    pub index: u64,
}

impl NodeId {
    pub const fn new(layer: Layer, index: u64) -> Self {
        Self { layer, index }
    }

    pub fn placeholder(layer: Layer) -> Self {
        Self::new(layer, PLACEHOLDER_INDEX)
    }

    pub fn is_placeholder(&self) -> bool {
        self.index == PLACEHOLDER_INDEX
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.layer.name(), self.index)
    }
}

impl FromStr for NodeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Malformed(format!("bad node id `{s}`"));
        let (layer, index) = s.split_once('/').ok_or_else(bad)?;
        let layer = Layer::ALL.into_iter().find(|l| l.name() == layer).ok_or_else(bad)?;
        Ok(Self::new(layer, index.parse().map_err(|_| bad())?))
    }
}

impl Serialize for NodeId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub type Attributes = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphNode {
    pub id: NodeId,
    pub layer: Layer,
    pub position: Point3,
    pub attributes: Attributes,
}

impl GraphNode {
    pub fn new(id: NodeId, position: Point3) -> Self {
        Self { id, layer: id.layer, position, attributes: Attributes::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.attributes.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdge {
    pub parent: NodeId,
    pub child: NodeId,
}

/// Typed parent-child graph. Nodes and edges are kept ordered by layer, then
/// index, which fixes the serialized order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SceneGraph {
    pub revision: u64,
    nodes: BTreeMap<NodeId, GraphNode>,
    edges: BTreeSet<GraphEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    version: u32,
    revision: u64,
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
}

impl SceneGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts or replaces a node.
    pub fn add_node(&mut self, node: GraphNode) {
        self.nodes.insert(node.id, node);
    }

    pub fn add_edge(&mut self, parent: NodeId, child: NodeId) {
        self.edges.insert(GraphEdge { parent, child });
    }

    pub fn node(&self, id: &NodeId) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &GraphNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Nodes of one layer, placeholders included.
    pub fn layer(&self, layer: Layer) -> impl Iterator<Item = &GraphNode> {
        self.nodes
            .range(NodeId::new(layer, 0)..=NodeId::new(layer, u64::MAX))
            .map(|(_, n)| n)
    }

    /// Number of non-placeholder nodes in a layer.
    pub fn count(&self, layer: Layer) -> usize {
        self.layer(layer).filter(|n| !n.id.is_placeholder()).count()
    }

    pub fn parent_of(&self, child: &NodeId) -> Option<NodeId> {
        self.edges.iter().find(|e| e.child == *child).map(|e| e.parent)
    }

    pub fn children_of(&self, parent: &NodeId) -> Vec<NodeId> {
        self.edges.iter().filter(|e| e.parent == *parent).map(|e| e.child).collect()
    }

    /// Checks every structural invariant: consistent node layers and
    /// attributes, edges between existing nodes of adjacent layers, exactly
    /// one parent for every non-building node, and no cycles.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        for (id, node) in &self.nodes {
            if node.id != *id || node.layer != id.layer {
                return fail(format!("node {id} carries layer {:?}", node.layer));
            }
            if !node.position.is_finite() {
                return fail(format!("node {id} has a non-finite position"));
            }
            for key in id.layer.required_attributes() {
                if !node.attributes.contains_key(*key) {
                    return fail(format!("node {id} lacks attribute `{key}`"));
                }
            }
        }
        let mut parents: BTreeMap<NodeId, usize> = BTreeMap::new();
        for e in &self.edges {
            for end in [e.parent, e.child] {
                if !self.nodes.contains_key(&end) {
                    return fail(format!("edge {} -> {} references missing {end}", e.parent, e.child));
                }
            }
            if e.child.layer.parent() != Some(e.parent.layer) {
                return fail(format!("edge {} -> {} skips or reverses a layer", e.parent, e.child));
            }
            *parents.entry(e.child).or_insert(0) += 1;
        }
        for id in self.nodes.keys() {
            let n = parents.get(id).copied().unwrap_or(0);
            let want = usize::from(id.layer != Layer::Building);
            if n != want {
                return fail(format!("node {id} has {n} parents"));
            }
        }
        if !self.is_acyclic() {
            return fail("graph has a cycle".into());
        }
        Ok(())
    }

    /// Kahn's algorithm over the edge set.
    pub fn is_acyclic(&self) -> bool {
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.keys().map(|k| (*k, 0)).collect();
        let mut out: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for e in &self.edges {
            *indegree.entry(e.child).or_insert(0) += 1;
            indegree.entry(e.parent).or_insert(0);
            out.entry(e.parent).or_default().push(e.child);
        }
        let mut ready: Vec<NodeId> =
            indegree.iter().filter(|(_, d)| **d == 0).map(|(k, _)| *k).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for c in out.get(&n).into_iter().flatten() {
                let d = indegree.get_mut(c).expect("edge endpoint registered");
                *d -= 1;
                if *d == 0 {
                    ready.push(*c);
                }
            }
        }
        seen == indegree.len()
    }

    /// Validated, schema-versioned JSON.
    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let doc = GraphDocument {
            version: SCHEMA_VERSION,
            revision: self.revision,
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.iter().copied().collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GraphDocument =
            serde_json::from_str(s).map_err(|e| Error::Malformed(e.to_string()))?;
        if doc.version != SCHEMA_VERSION {
            return Err(Error::Malformed(format!("unsupported graph version {}", doc.version)));
        }
        let mut g = SceneGraph { revision: doc.revision, ..Self::default() };
        let (n_nodes, n_edges) = (doc.nodes.len(), doc.edges.len());
        for n in doc.nodes {
            g.add_node(n);
        }
        for e in doc.edges {
            g.add_edge(e.parent, e.child);
        }
        if g.nodes.len() != n_nodes || g.edges.len() != n_edges {
            return Err(Error::Malformed("duplicate nodes or edges".into()));
        }
        g.validate()?;
        Ok(g)
    }
}
