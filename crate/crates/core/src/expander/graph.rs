//! d-regular simple graphs with per-node port labels.
//!
//! Ports address links: `ports[u][p] = (v, p')` with the reciprocity
//! `ports[v][p'] = (u, p)`, which is what lets a token path of port labels
//! be replayed backwards exactly.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    /// `ports[u][p] = (neighbor, reverse port)`.
    ports: Vec<Vec<(u32, u16)>>,
}

const PAIRING_ATTEMPTS: usize = 1_000;

impl RegularGraph {
    /// Random simple d-regular graph via the pairing (configuration)
    /// model with rejection: stubs are matched one pair at a time, a pair
    /// producing a self-loop or multi-edge is redrawn, and the whole
    /// pairing restarts when only unsuitable pairs remain. (Rejecting the
    /// whole pairing on first conflict would need ~exp((d^2-1)/4)
    /// attempts, hopeless already at d = 8.)
    pub fn random<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Self> {
        if d >= n {
            return Err(Error::Parameter(format!(
                "degree {d} must be smaller than n = {n}"
            )));
        }
        if d == 0 {
            return Err(Error::Parameter("degree must be positive".into()));
        }
        if (n * d) % 2 != 0 {
            return Err(Error::Parameter(format!(
                "n * d = {} must be even",
                n * d
            )));
        }

        'attempt: for _ in 0..PAIRING_ATTEMPTS {
            let mut stubs: Vec<u32> = (0..n)
                .flat_map(|u| std::iter::repeat(u as u32).take(d))
                .collect();
            let mut ports: Vec<Vec<(u32, u16)>> = vec![Vec::with_capacity(d); n];
            while stubs.len() > 1 {
                let mut tries = 0;
                loop {
                    let i = rng.random_range(0..stubs.len());
                    let mut j = rng.random_range(0..stubs.len() - 1);
                    if j >= i {
                        j += 1;
                    }
                    let u = stubs[i] as usize;
                    let v = stubs[j] as usize;
                    if u != v && !ports[u].iter().any(|&(w, _)| w as usize == v) {
                        let pu = ports[u].len() as u16;
                        let pv = ports[v].len() as u16;
                        ports[u].push((v as u32, pv));
                        ports[v].push((u as u32, pu));
                        let (hi, lo) = (i.max(j), i.min(j));
                        stubs.swap_remove(hi);
                        stubs.swap_remove(lo);
                        break;
                    }
                    tries += 1;
                    if tries > 100 + 20 * stubs.len() {
                        // stuck on an unsatisfiable tail; restart the pairing
                        continue 'attempt;
                    }
                }
            }
            return Ok(Self { n, d, ports });
        }
        Err(Error::Generation(format!(
            "no simple pairing found for n = {n}, d = {d} in {PAIRING_ATTEMPTS} attempts"
        )))
    }

    /// Builds a graph from an explicit edge list, assigning ports in edge
    /// order.
    pub fn from_edges(n: usize, d: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut ports: Vec<Vec<(u32, u16)>> = vec![Vec::with_capacity(d); n];
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::Validation(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop at {u}")));
            }
            let pu = ports[u].len() as u16;
            let pv = ports[v].len() as u16;
            ports[u].push((v as u32, pv));
            ports[v].push((u as u32, pu));
        }
        let graph = Self { n, d, ports };
        graph.check_invariants()?;
        Ok(graph)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    /// Neighbor and reverse port behind a port of a node.
    pub fn port(&self, node: usize, port: usize) -> (u32, u16) {
        self.ports[node][port]
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = u32> + '_ {
        self.ports[node].iter().map(|&(v, _)| v)
    }

    /// Checks regularity, simplicity and port reciprocity.
    pub fn check_invariants(&self) -> Result<()> {
        for (u, row) in self.ports.iter().enumerate() {
            if row.len() != self.d {
                return Err(Error::Validation(format!(
                    "node {u} has {} ports, expected {}",
                    row.len(),
                    self.d
                )));
            }
            let mut seen = std::collections::HashSet::new();
            for (p, &(v, rp)) in row.iter().enumerate() {
                if v as usize == u {
                    return Err(Error::Validation(format!("self-loop at {u}")));
                }
                if !seen.insert(v) {
                    return Err(Error::Validation(format!("multi-edge at {u} -> {v}")));
                }
                let (back, bp) = self.ports[v as usize][rp as usize];
                if back as usize != u || bp as usize != p {
                    return Err(Error::Validation(format!(
                        "port reciprocity broken at {u}.{p} -> {v}.{rp}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Connectivity by traversal.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.ports[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v as usize);
                }
            }
        }
        count == self.n
    }

    /// Edge list with `u < v`, sorted; the canonical serialized order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges = Vec::with_capacity(self.n * self.d / 2);
        for (u, row) in self.ports.iter().enumerate() {
            for &(v, _) in row {
                if (u as u32) < v {
                    edges.push((u as u32, v));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Text format: JSON header line `{"n":..,"d":..}` then one `u v` edge
    /// per line.
    pub fn to_edge_list(&self) -> String {
        let header = serde_json::to_string(&GraphHeader {
            n: self.n,
            d: self.d,
        })
        .expect("header serializes");
        let mut out = String::with_capacity(16 + self.n * self.d * 6);
        out.push_str(&header);
        out.push('\n');
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: GraphHeader = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Validation("empty graph file".into()))?,
        )
        .map_err(|e| Error::Validation(format!("bad graph header: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Validation(format!("bad edge line: {line}")))?;
            let v: u32 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Validation(format!("bad edge line: {line}")))?;
            edges.push((u, v));
        }
        Self::from_edges(header.n, header.d, &edges)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphHeader {
    n: usize,
    d: usize,
}
