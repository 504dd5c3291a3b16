//! Finite graphs and reduced edge words.
//!
//! A path class is a freely reduced word of signed edges. Letters reference
//! edges by index; graphs only ever grow by appending, so a word built on a
//! graph stays valid on every extension of it.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    base: usize,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub edge: usize,
    pub forward: bool,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        Letter {
            edge: self.edge,
            forward: !self.forward,
        }
    }
}

/// A reduced word together with its endpoints (needed for empty words).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathWord {
    start: usize,
    end: usize,
    letters: Vec<Letter>,
}

/// JSON graph format: `{vertices, base, edges: [{name, from, to}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub vertices: Vec<String>,
    pub base: String,
    pub edges: Vec<EdgeFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeFile {
    pub name: String,
    pub from: String,
    pub to: String,
}

impl PathWord {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_loop_at(&self, v: usize) -> bool {
        self.start == v && self.end == v
    }

    /// Reversed word with flipped signs.
    pub fn invert(&self) -> PathWord {
        PathWord {
            start: self.end,
            end: self.start,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Both words begin with the same signed letter.
    pub fn same_initial_segment(&self, other: &PathWord) -> bool {
        matches!((self.letters.first(), other.letters.first()), (Some(a), Some(b)) if a == b)
    }

    /// The last letter of `self` is the inverse of the first letter of `other`.
    pub fn final_meets_initial(&self, other: &PathWord) -> bool {
        matches!((self.letters.last(), other.letters.first()), (Some(a), Some(b)) if a.inverse() == *b)
    }
}

impl Graph {
    pub fn new(vertices: Vec<String>, base: &str, edges: Vec<(String, String, String)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{v}`")));
            }
        }
        let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let base = *index.get(base).ok_or_else(|| Error::UnknownVertex(base.to_string()))?;
        let mut names = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (name, from, to) in edges {
            if !names.insert(name.clone()) {
                return Err(Error::InvalidGraph(format!("duplicate edge `{name}`")));
            }
            let source = *index.get(from.as_str()).ok_or_else(|| Error::UnknownVertex(from.clone()))?;
            let target = *index.get(to.as_str()).ok_or_else(|| Error::UnknownVertex(to.clone()))?;
            out.push(Edge { name, source, target });
        }
        Ok(Graph {
            vertices,
            base,
            edges: out,
        })
    }

    /// One vertex `m` carrying `k` self-loops `a1..ak`.
    pub fn bouquet(k: usize) -> Self {
        Graph {
            vertices: vec!["m".into()],
            base: 0,
            edges: (1..=k)
                .map(|i| Edge {
                    name: format!("a{i}"),
                    source: 0,
                    target: 0,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self> {
        Graph::new(
            file.vertices.clone(),
            &file.base,
            file.edges
                .iter()
                .map(|e| (e.name.clone(), e.from.clone(), e.to.clone()))
                .collect(),
        )
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self.vertices.clone(),
            base: self.vertices[self.base].clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeFile {
                    name: e.name.clone(),
                    from: self.vertices[e.source].clone(),
                    to: self.vertices[e.target].clone(),
                })
                .collect(),
        }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn has_name(&self, name: &str) -> bool {
        self.vertex_index(name).is_some() || self.edge_index(name).is_some()
    }

    pub fn add_vertex(&mut self, name: String) -> Result<usize> {
        if self.vertex_index(&name).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate vertex `{name}`")));
        }
        self.vertices.push(name);
        Ok(self.vertices.len() - 1)
    }

    pub fn add_edge(&mut self, name: String, source: usize, target: usize) -> Result<usize> {
        if self.edge_index(&name).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate edge `{name}`")));
        }
        if source >= self.vertices.len() || target >= self.vertices.len() {
            return Err(Error::InvalidGraph(format!("edge `{name}` has an invalid endpoint")));
        }
        self.edges.push(Edge { name, source, target });
        Ok(self.edges.len() - 1)
    }

    fn letter_source(&self, l: Letter) -> usize {
        let e = &self.edges[l.edge];
        if l.forward {
            e.source
        } else {
            e.target
        }
    }

    fn letter_target(&self, l: Letter) -> usize {
        let e = &self.edges[l.edge];
        if l.forward {
            e.target
        } else {
            e.source
        }
    }

    pub fn letter(&self, name: &str, forward: bool) -> Result<Letter> {
        let edge = self.edge_index(name).ok_or_else(|| Error::UnknownEdge(name.to_string()))?;
        Ok(Letter { edge, forward })
    }

    pub fn empty_word(&self, v: usize) -> PathWord {
        PathWord {
            start: v,
            end: v,
            letters: Vec::new(),
        }
    }

    /// Free-groupoid normal form of a raw letter sequence starting at `start`.
    pub fn reduce(&self, start: usize, raw: &[Letter]) -> Result<PathWord> {
        if start >= self.vertices.len() {
            return Err(Error::UnknownVertex(start.to_string()));
        }
        let mut stack: Vec<Letter> = Vec::with_capacity(raw.len());
        let mut at = start;
        for &l in raw {
            if l.edge >= self.edges.len() {
                return Err(Error::UnknownEdge(format!("#{}", l.edge)));
            }
            let s = self.letter_source(l);
            if s != at {
                return Err(Error::EndpointMismatch {
                    end: self.vertices[at].clone(),
                    start: self.vertices[s].clone(),
                });
            }
            at = self.letter_target(l);
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Ok(PathWord {
            start,
            end: at,
            letters: stack,
        })
    }

    /// Reduces a nonempty letter sequence, taking its start from the first letter.
    pub fn word(&self, raw: &[Letter]) -> Result<PathWord> {
        let first = raw
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty letter sequence has no start vertex".into()))?;
        if first.edge >= self.edges.len() {
            return Err(Error::UnknownEdge(format!("#{}", first.edge)));
        }
        self.reduce(self.letter_source(*first), raw)
    }

    /// Reduced concatenation; `a` must end where `b` starts.
    pub fn compose(&self, a: &PathWord, b: &PathWord) -> Result<PathWord> {
        if a.end != b.start {
            return Err(Error::EndpointMismatch {
                end: self.vertices[a.end].clone(),
                start: self.vertices[b.start].clone(),
            });
        }
        let mut raw = a.letters.clone();
        raw.extend_from_slice(&b.letters);
        self.reduce(a.start, &raw)
    }

    /// Parses `"e1 e2^-1 e3"`; the empty string is the empty loop at the base.
    pub fn parse_word(&self, text: &str) -> Result<PathWord> {
        let letters = text
            .split_whitespace()
            .map(|tok| match tok.strip_suffix("^-1") {
                Some(name) => self.letter(name, false),
                None => self.letter(tok, true),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Ok(self.empty_word(self.base));
        }
        self.word(&letters)
    }

    pub fn format_word(&self, w: &PathWord) -> String {
        w.letters
            .iter()
            .map(|l| {
                let name = &self.edges[l.edge].name;
                if l.forward {
                    name.clone()
                } else {
                    format!("{name}^-1")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Breadth-first spanning tree from the base, scanning edges in input
    /// order. Returns, per vertex, the tree path from the base, and the set
    /// of tree edges.
    fn spanning_tree(&self) -> Result<(Vec<PathWord>, Vec<bool>)> {
        let n = self.vertices.len();
        let mut path: Vec<Option<PathWord>> = vec![None; n];
        let mut is_tree = vec![false; self.edges.len()];
        path[self.base] = Some(self.empty_word(self.base));
        let mut queue = VecDeque::from([self.base]);
        while let Some(v) = queue.pop_front() {
            for (i, e) in self.edges.iter().enumerate() {
                let step = if e.source == v && path[e.target].is_none() {
                    Some((e.target, Letter { edge: i, forward: true }))
                } else if e.target == v && path[e.source].is_none() {
                    Some((e.source, Letter { edge: i, forward: false }))
                } else {
                    None
                };
                if let Some((w, l)) = step {
                    let mut p = path[v].clone().unwrap();
                    p.letters.push(l);
                    p.end = w;
                    path[w] = Some(p);
                    is_tree[i] = true;
                    queue.push_back(w);
                }
            }
        }
        let paths = path
            .into_iter()
            .enumerate()
            .map(|(v, p)| p.ok_or_else(|| Error::Disconnected(self.vertices[v].clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok((paths, is_tree))
    }

    /// Tree paths `γ_x` from the base to every vertex.
    pub fn tree_paths(&self) -> Result<Vec<PathWord>> {
        Ok(self.spanning_tree()?.0)
    }

    /// One loop at the base per non-tree edge `e(s→t)`: `γ_s · e · γ_t⁻¹`.
    pub fn fundamental_loops(&self) -> Result<Vec<PathWord>> {
        let (paths, is_tree) = self.spanning_tree()?;
        let mut loops = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if is_tree[i] {
                continue;
            }
            let mut raw = paths[e.source].letters.clone();
            raw.push(Letter { edge: i, forward: true });
            raw.extend(paths[e.target].invert().letters);
            loops.push(self.reduce(self.base, &raw)?);
        }
        Ok(loops)
    }

    /// Splits `a` at every interior visit of vertex `x`.
    pub fn decompose_at_vertex(&self, a: &PathWord, x: usize) -> Vec<PathWord> {
        let mut parts = Vec::new();
        let mut current = self.empty_word(a.start);
        let last = a.letters.len().saturating_sub(1);
        for (i, &l) in a.letters.iter().enumerate() {
            current.letters.push(l);
            current.end = self.letter_target(l);
            if i < last && current.end == x {
                let next_start = current.end;
                parts.push(std::mem::replace(&mut current, self.empty_word(next_start)));
            }
        }
        parts.push(current);
        parts
    }

    /// Whether every edge of `sub` appears here under the same name with the
    /// same endpoint names.
    pub fn contains_subgraph(&self, sub: &Graph) -> Result<Vec<usize>> {
        sub.edges
            .iter()
            .map(|e| {
                let i = self.edge_index(&e.name).ok_or_else(|| Error::MissingEdge(e.name.clone()))?;
                let mine = &self.edges[i];
                if self.vertices[mine.source] != sub.vertices[e.source]
                    || self.vertices[mine.target] != sub.vertices[e.target]
                {
                    return Err(Error::MissingEdge(format!("{} (endpoints differ)", e.name)));
                }
                Ok(i)
            })
            .collect()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "graph({} vertices, {} edges)", self.vertices.len(), self.edges.len())
    }
}
