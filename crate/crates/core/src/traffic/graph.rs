//! Directed road graph and its text format.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::Rng;

use super::TrafficError;
use crate::keyval;
use crate::sim::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Crossing,
    Turn,
    Parking,
    PedStop,
    Plain,
}

impl NodeKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "crossing" => Self::Crossing,
            "turn" => Self::Turn,
            "parking" => Self::Parking,
            "ped_stop" => Self::PedStop,
            "plain" => Self::Plain,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNode {
    pub id: u32,
    pub position: Vec2,
    pub kind: NodeKind,
    /// Parking bays (only meaningful for parking nodes).
    pub capacity: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadEdge {
    /// Node indices (not ids).
    pub from: usize,
    pub to: usize,
    pub speed_limit: f64,
    pub length: f64,
}

impl RoadEdge {
    pub fn direction(&self, graph: &RoadGraph) -> Vec2 {
        (graph.nodes[self.to].position - graph.nodes[self.from].position) / self.length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    pub name: String,
    pub nodes: Vec<RoadNode>,
    pub edges: Vec<RoadEdge>,
    /// Edge indices where new cars appear.
    pub entries: Vec<usize>,
    out_edges: Vec<Vec<usize>>,
}

/// Names of the shipped road graphs.
pub const BUILTIN_ROADS: [&str; 2] = ["junction", "park"];

fn builtin_source(name: &str) -> Option<&'static str> {
    match name {
        "junction" => Some(include_str!("../../roads/junction.roads")),
        "park" => Some(include_str!("../../roads/park.roads")),
        _ => None,
    }
}

impl RoadGraph {
    /// Resolves a built-in graph name or a path to a road file.
    pub fn build(spec: &str) -> Result<RoadGraph, TrafficError> {
        if let Some(src) = builtin_source(spec) {
            return RoadGraph::parse(spec, src);
        }
        let path = Path::new(spec);
        if path.is_file() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| TrafficError::Io(format!("{}: {e}", path.display())))?;
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("roads");
            return RoadGraph::parse(name, &text);
        }
        Err(TrafficError::Unknown(spec.to_string()))
    }

    pub fn parse(name: &str, text: &str) -> Result<RoadGraph, TrafficError> {
        let entries = keyval::parse(text)?;
        let mut nodes: Vec<RoadNode> = Vec::new();
        let mut raw_edges = Vec::new();
        let mut raw_entries = Vec::new();
        for e in &entries {
            let fields: Vec<&str> = e.value.split_whitespace().collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| e.error(format!("`{s}` is not a number")))
            };
            let id = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| e.error(format!("`{s}` is not a node id")))
            };
            match e.key.as_str() {
                "node" => {
                    if !(4..=5).contains(&fields.len()) {
                        return Err(e.error("expected `id x y kind [capacity]`").into());
                    }
                    let kind = NodeKind::parse(fields[3])
                        .ok_or_else(|| e.error(format!("unknown node kind `{}`", fields[3])))?;
                    let capacity = match fields.get(4) {
                        Some(c) => c
                            .parse::<usize>()
                            .map_err(|_| e.error(format!("`{c}` is not a capacity")))?,
                        None if kind == NodeKind::Parking => 1,
                        None => 0,
                    };
                    let node_id = id(fields[0])?;
                    if nodes.iter().any(|n| n.id == node_id) {
                        return Err(e.error(format!("duplicate node id {node_id}")).into());
                    }
                    nodes.push(RoadNode {
                        id: node_id,
                        position: Vec2::new(num(fields[1])?, num(fields[2])?),
                        kind,
                        capacity,
                    });
                }
                "edge" => {
                    let [from, to, limit] = fields[..] else {
                        return Err(e.error("expected `from to speed_limit`").into());
                    };
                    let limit = num(limit)?;
                    if limit <= 0.0 {
                        return Err(e.error("speed limit must be positive").into());
                    }
                    raw_edges.push((e.line, id(from)?, id(to)?, limit));
                }
                "entry" => {
                    let [from, to] = fields[..] else {
                        return Err(e.error("expected `from to`").into());
                    };
                    raw_entries.push((e.line, id(from)?, id(to)?));
                }
                _ => return Err(e.error("unknown key").into()),
            }
        }

        let index: BTreeMap<u32, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut edges = Vec::with_capacity(raw_edges.len());
        for (line, from, to, speed_limit) in raw_edges {
            let missing: Vec<u32> = [from, to]
                .into_iter()
                .filter(|n| !index.contains_key(n))
                .collect();
            if !missing.is_empty() {
                return Err(TrafficError::Invalid(format!(
                    "line {line}: edge references missing node(s) {missing:?}"
                )));
            }
            let (f, t) = (index[&from], index[&to]);
            let length = (nodes[t].position - nodes[f].position).norm();
            if length <= 0.0 {
                return Err(TrafficError::Invalid(format!(
                    "line {line}: edge {from}->{to} has zero length"
                )));
            }
            edges.push(RoadEdge {
                from: f,
                to: t,
                speed_limit,
                length,
            });
        }
        let mut entry_edges = Vec::new();
        for (line, from, to) in raw_entries {
            let found = edges.iter().position(|ed| {
                index.get(&from) == Some(&ed.from) && index.get(&to) == Some(&ed.to)
            });
            match found {
                Some(i) => entry_edges.push(i),
                None => {
                    return Err(TrafficError::Invalid(format!(
                        "line {line}: entry {from}->{to} is not an edge"
                    )))
                }
            }
        }
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (i, ed) in edges.iter().enumerate() {
            out_edges[ed.from].push(i);
        }
        let graph = RoadGraph {
            name: name.to_string(),
            nodes,
            edges,
            entries: entry_edges,
            out_edges,
        };
        graph.validate()?;
        Ok(graph)
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.entries.is_empty() {
            return Err(TrafficError::Invalid("road graph has no entry edge".into()));
        }
        for n in &self.nodes {
            if n.kind == NodeKind::Parking && n.capacity < 1 {
                return Err(TrafficError::Invalid(format!(
                    "parking node {} needs capacity >= 1",
                    n.id
                )));
            }
        }
        let dead_ends: Vec<u32> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(i, _)| self.out_edges[*i].is_empty())
            .map(|(_, n)| n.id)
            .collect();
        if !dead_ends.is_empty() {
            return Err(TrafficError::Invalid(format!(
                "nodes without outgoing edges: {dead_ends:?}"
            )));
        }
        for &entry in &self.entries {
            let reached = self.reachable_from(self.edges[entry].to);
            let mut unreachable: Vec<u32> = (0..self.nodes.len())
                .filter(|i| !reached.contains(i) && *i != self.edges[entry].from)
                .map(|i| self.nodes[i].id)
                .collect();
            unreachable.sort_unstable();
            if !unreachable.is_empty() {
                return Err(TrafficError::Invalid(format!(
                    "unreachable nodes: {unreachable:?}"
                )));
            }
        }
        Ok(())
    }

    fn reachable_from(&self, start: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &e in &self.out_edges[n] {
                let t = self.edges[e].to;
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn node_index(&self, id: u32) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    /// Edge index by endpoint node ids.
    pub fn edge_between(&self, from: u32, to: u32) -> Option<usize> {
        let (f, t) = (self.node_index(from)?, self.node_index(to)?);
        self.edges.iter().position(|e| e.from == f && e.to == t)
    }

    /// Picks an outgoing edge of `node` uniformly, excluding the U-turn back
    /// to `came_from` when other exits exist.
    pub fn choose_exit<R: Rng + ?Sized>(
        &self,
        node: usize,
        came_from: Option<usize>,
        rng: &mut R,
    ) -> Result<usize, TrafficError> {
        let all = &self.out_edges[node];
        if all.is_empty() {
            return Err(TrafficError::NoExit(self.nodes[node].id));
        }
        let admissible: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&e| Some(self.edges[e].to) != came_from)
            .collect();
        let pool = if admissible.is_empty() {
            all.as_slice()
        } else {
            &admissible
        };
        if pool.len() == 1 {
            return Ok(pool[0]);
        }
        Ok(pool[rng.random_range(0..pool.len())])
    }
}
