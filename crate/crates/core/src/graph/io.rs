//! Plain-text readers for networks, communities, embeddings and attributes.
//!
//! All formats are whitespace separated and line oriented; `#` starts a
//! comment. Node labels in side files are resolved through the network's
//! [`IdMap`].

use std::fs;
use std::path::Path;

use super::{AttributeTable, CommunityStructure, EmbeddingTable, IdMap, Network, NetworkBuilder};
use crate::{Error, NodeId, Result};

/// How to interpret an edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeListFormat {
    /// When false each line is stored as two directed edges.
    pub directed: bool,
}

impl Default for EdgeListFormat {
    fn default() -> Self {
        Self { directed: true }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

/// Content lines as `(1-based line number, text without comment)`.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

struct LineError<'a> {
    source: &'a str,
    line: usize,
}

impl LineError<'_> {
    fn at(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source.to_owned(),
            line: self.line,
            message: message.into(),
        }
    }

    fn wrap(&self, err: Error) -> Error {
        self.at(err.to_string())
    }
}

pub fn load_network(path: impl AsRef<Path>, format: EdgeListFormat) -> Result<Network> {
    let path = path.as_ref();
    parse_network(&read(path)?, format, &source_name(path))
}

/// Parses an edge list.
///
/// An optional `#nodes N` header switches to numeric ids `0..N`, which also
/// makes isolated nodes representable. Without it, labels are arbitrary
/// tokens interned in order of first appearance. Each edge line is
/// `src dst [p] [b]`.
pub fn parse_network(text: &str, format: EdgeListFormat, source: &str) -> Result<Network> {
    let mut declared: Option<usize> = None;
    let mut seen_edge = false;
    let mut ids = IdMap::default();
    let mut edges: Vec<(usize, NodeId, NodeId, Option<f64>, Option<f64>)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let at = LineError { source, line: i + 1 };
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix("#nodes") {
            if seen_edge || declared.is_some() {
                return Err(at.at("`#nodes` header must appear once, before any edge"));
            }
            let n = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| at.at(format!("invalid node count `{}`", rest.trim())))?;
            declared = Some(n);
            continue;
        }
        let line = trimmed.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        seen_edge = true;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if !(2..=4).contains(&tokens.len()) {
            return Err(at.at(format!(
                "expected `src dst [p] [b]`, found {} fields",
                tokens.len()
            )));
        }
        let mut node = |token: &str| -> Result<NodeId> {
            match declared {
                Some(count) => {
                    let id = token
                        .parse::<usize>()
                        .map_err(|_| at.at(format!("node `{token}` is not an integer id")))?;
                    if id >= count {
                        return Err(at.wrap(Error::NodeOutOfRange { node: id, count }));
                    }
                    Ok(id)
                }
                None => Ok(ids.intern(token)),
            }
        };
        let src = node(tokens[0])?;
        let dst = node(tokens[1])?;
        if src == dst {
            return Err(at.wrap(Error::SelfLoop(tokens[0].to_owned())));
        }
        let param = |idx: usize, name: &'static str| -> Result<Option<f64>> {
            let Some(token) = tokens.get(idx) else {
                return Ok(None);
            };
            let value = token
                .parse::<f64>()
                .map_err(|_| at.at(format!("invalid {name} `{token}`")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(at.wrap(Error::ParameterRange {
                    from: tokens[0].to_owned(),
                    to: tokens[1].to_owned(),
                    name,
                    value,
                }));
            }
            Ok(Some(value))
        };
        let p = param(2, "p")?;
        let b = param(3, "b")?;
        edges.push((i + 1, src, dst, p, b));
    }

    let (count, ids) = match declared {
        Some(n) => (n, IdMap::dense(n)),
        None => (ids.len(), ids),
    };
    let mut builder = NetworkBuilder::new(count)
        .directed(format.directed)
        .ids(ids);
    for &(_, s, t, p, b) in &edges {
        builder.push(s, t, p, b);
    }
    let net = builder.build()?;
    net.check_lt_weights()?;
    Ok(net)
}

pub fn load_communities(path: impl AsRef<Path>, count: usize, ids: &IdMap) -> Result<CommunityStructure> {
    let path = path.as_ref();
    parse_communities(&read(path)?, count, ids, &source_name(path))
}

/// Parses `node community_index` (disjoint) or `node: w_1 … w_C`
/// (overlapping) lines. Nodes that never appear get an all-zero vector.
pub fn parse_communities(
    text: &str,
    count: usize,
    ids: &IdMap,
    source: &str,
) -> Result<CommunityStructure> {
    let n = ids.len();
    let mut overlapping: Option<bool> = None;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut assignment: Vec<Option<usize>> = vec![None; n];

    for (line, text) in content_lines(text) {
        let at = LineError { source, line };
        let (label, rest, is_overlapping) = match text.split_once(':') {
            Some((label, rest)) => (label.trim(), rest, true),
            None => {
                let mut it = text.splitn(2, char::is_whitespace);
                (it.next().unwrap_or(""), it.next().unwrap_or(""), false)
            }
        };
        if *overlapping.get_or_insert(is_overlapping) != is_overlapping {
            return Err(at.at("cannot mix disjoint and overlapping membership lines"));
        }
        let u = ids
            .get(label)
            .ok_or_else(|| at.wrap(Error::UnknownNode(label.to_owned())))?;
        if rows[u].is_some() || assignment[u].is_some() {
            return Err(at.at(format!("node `{label}` listed twice")));
        }
        if is_overlapping {
            let row = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| at.at(format!("invalid membership weight `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != count {
                return Err(at.at(format!(
                    "expected {count} membership weights, found {}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(at.at(format!("membership weight {w} must be non-negative")));
            }
            rows[u] = Some(row);
        } else {
            let token = rest.trim();
            let c = token
                .parse::<usize>()
                .map_err(|_| at.at(format!("invalid community index `{token}`")))?;
            if c >= count {
                return Err(at.wrap(Error::CommunityOutOfRange { index: c, count }));
            }
            assignment[u] = Some(c);
        }
    }

    if overlapping == Some(true) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| r.unwrap_or_else(|| vec![0.0; count]))
            .collect();
        CommunityStructure::overlapping(count, &rows)
    } else {
        CommunityStructure::disjoint(count, &assignment)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>, ids: &IdMap) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    parse_embeddings(&read(path)?, ids, &source_name(path))
}

/// Parses `node v_1 … v_d` lines; every node must appear exactly once.
pub fn parse_embeddings(text: &str, ids: &IdMap, source: &str) -> Result<EmbeddingTable> {
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; ids.len()];
    for (line, text) in content_lines(text) {
        let at = LineError { source, line };
        let mut tokens = text.split_whitespace();
        let label = tokens.next().unwrap_or("");
        let u = ids
            .get(label)
            .ok_or_else(|| at.wrap(Error::UnknownNode(label.to_owned())))?;
        let row = tokens
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| at.at(format!("invalid embedding entry `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if rows[u].replace(row).is_some() {
            return Err(at.at(format!("node `{label}` listed twice")));
        }
    }
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(u, r)| {
            r.ok_or_else(|| Error::Embedding(format!("no vector for node `{}`", ids.label(u))))
        })
        .collect::<Result<Vec<_>>>()?;
    EmbeddingTable::new(&rows)
}

pub fn load_attributes(path: impl AsRef<Path>, ids: &IdMap) -> Result<AttributeTable> {
    let path = path.as_ref();
    parse_attributes(&read(path)?, ids, &source_name(path))
}

/// Parses `node attr=value[,value…] [attr2=…]` lines. Repeated lines for the
/// same node and attribute accumulate.
pub fn parse_attributes(text: &str, ids: &IdMap, source: &str) -> Result<AttributeTable> {
    let mut table = AttributeTable::new(ids.len());
    for (line, text) in content_lines(text) {
        let at = LineError { source, line };
        let mut tokens = text.split_whitespace();
        let label = tokens.next().unwrap_or("");
        let u = ids
            .get(label)
            .ok_or_else(|| at.wrap(Error::UnknownNode(label.to_owned())))?;
        let mut any = false;
        for token in tokens {
            let (name, values) = token
                .split_once('=')
                .ok_or_else(|| at.at(format!("expected `attr=value`, found `{token}`")))?;
            if name.is_empty() {
                return Err(at.at("empty attribute name"));
            }
            let values = values.split(',').filter(|v| !v.is_empty());
            table.insert(u, name, values).map_err(|e| at.wrap(e))?;
            any = true;
        }
        if !any {
            return Err(at.at("expected at least one `attr=value` field"));
        }
    }
    Ok(table)
}
