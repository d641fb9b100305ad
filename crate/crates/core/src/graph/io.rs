//! Edge-list text format.
//!
//! ```text
//! # optional comment lines
//! 3          <- vertex count
//! 0 1        <- one undirected edge per line
//! 1 2
//! ```

use std::fmt::Write as _;

use super::Graph;
use crate::error::{Error, Result};

impl Graph {
    /// Parses the edge-list format. Duplicate undirected edges collapse.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (first, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing vertex count"))?;
        let n: usize = header
            .parse()
            .map_err(|_| Error::parse(first, format!("invalid vertex count `{header}`")))?;

        let mut adj = vec![Vec::new(); n];
        for (line, content) in lines {
            let mut fields = content.split_whitespace();
            let mut next_id = || -> Result<usize> {
                let tok = fields
                    .next()
                    .ok_or_else(|| Error::parse(line, "expected two vertex ids"))?;
                tok.parse()
                    .map_err(|_| Error::parse(line, format!("invalid vertex id `{tok}`")))
            };
            let u = next_id()?;
            let v = next_id()?;
            if fields.next().is_some() {
                return Err(Error::parse(line, "trailing fields after edge"));
            }
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexRange { line, vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { line, vertex: u });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adj })
    }

    /// Canonical edge list: vertex count, then `u v` with `u < v` in ascending order.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{}", self.n()).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}
