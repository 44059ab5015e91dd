//! Graph state: edge storage, degrees, neighbor intersection, dyad indexing.
//!
//! A [`Graph`] is the mutable state `y^t` grown by the sampler. Neighbor sets
//! are kept sorted so that shared-neighbor counts are a linear merge over the
//! smaller set. Vertex ids are dense `0..n`; string labels are mapped at
//! ingestion.

use crate::error::{Error, Result};

/// An ordered or unordered vertex pair whose connection status is one edge
/// variable. For undirected graphs the canonical form has `tail < head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyad {
    pub tail: u32,
    pub head: u32,
}

impl Dyad {
    pub fn new(tail: u32, head: u32) -> Self {
        Dyad { tail, head }
    }

    /// Canonical undirected form (`tail < head`).
    pub fn canonical(tail: u32, head: u32) -> Self {
        if tail <= head {
            Dyad { tail, head }
        } else {
            Dyad { tail: head, head: tail }
        }
    }
}

/// Mutable adjacency structure over `n` vertices, undirected or directed.
///
/// Invariants: no self-loops, no multi-edges; degrees and the edge count are
/// maintained incrementally and always match the adjacency lists.
#[derive(Debug, Clone)]
pub struct Graph {
    n: u32,
    directed: bool,
    /// Sorted out-neighbor sets (undirected: the full neighbor sets).
    out_nbrs: Vec<Vec<u32>>,
    /// Sorted in-neighbor sets; unused when undirected.
    in_nbrs: Vec<Vec<u32>>,
    edge_count: u64,
}

impl Graph {
    /// Empty graph on `n >= 1` vertices.
    pub fn new(n: u32, directed: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graph needs at least 1 vertex".into()));
        }
        Ok(Graph {
            n,
            directed,
            out_nbrs: vec![Vec::new(); n as usize],
            in_nbrs: if directed { vec![Vec::new(); n as usize] } else { Vec::new() },
            edge_count: 0,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// Number of edge variables: n(n-1)/2 undirected, n(n-1) directed.
    pub fn dyad_count(&self) -> u64 {
        let n = self.n as u64;
        if self.directed {
            n * (n - 1)
        } else {
            n * (n - 1) / 2
        }
    }

    fn check_dyad(&self, d: Dyad) -> Result<()> {
        if d.tail == d.head {
            return Err(Error::SelfLoop(d.tail));
        }
        for v in [d.tail, d.head] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { v, n: self.n });
            }
        }
        Ok(())
    }

    /// Total degree: neighbor count undirected, in-degree + out-degree directed.
    #[inline]
    pub fn degree(&self, v: u32) -> u32 {
        let out = self.out_nbrs[v as usize].len() as u32;
        if self.directed {
            out + self.in_nbrs[v as usize].len() as u32
        } else {
            out
        }
    }

    /// Sorted neighbor set (undirected graphs only give the full set; for
    /// directed graphs these are the out-neighbors).
    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.out_nbrs[v as usize]
    }

    pub fn in_neighbors(&self, v: u32) -> &[u32] {
        if self.directed {
            &self.in_nbrs[v as usize]
        } else {
            &self.out_nbrs[v as usize]
        }
    }

    #[inline]
    pub fn has_edge(&self, d: Dyad) -> bool {
        if d.tail == d.head || d.tail >= self.n || d.head >= self.n {
            return false;
        }
        if self.directed {
            self.out_nbrs[d.tail as usize].binary_search(&d.head).is_ok()
        } else {
            let c = Dyad::canonical(d.tail, d.head);
            self.out_nbrs[c.tail as usize].binary_search(&c.head).is_ok()
        }
    }

    /// Sets one edge variable. Idempotent; degrees and edge count stay
    /// consistent. Undirected dyads are canonicalized internally.
    pub fn set_edge(&mut self, d: Dyad, present: bool) -> Result<()> {
        self.check_dyad(d)?;
        let d = if self.directed { d } else { Dyad::canonical(d.tail, d.head) };
        let changed = if present {
            insert_sorted(&mut self.out_nbrs[d.tail as usize], d.head)
        } else {
            remove_sorted(&mut self.out_nbrs[d.tail as usize], d.head)
        };
        if changed {
            if self.directed {
                if present {
                    insert_sorted(&mut self.in_nbrs[d.head as usize], d.tail);
                } else {
                    remove_sorted(&mut self.in_nbrs[d.head as usize], d.tail);
                }
            } else if present {
                insert_sorted(&mut self.out_nbrs[d.head as usize], d.tail);
            } else {
                remove_sorted(&mut self.out_nbrs[d.head as usize], d.tail);
            }
            if present {
                self.edge_count += 1;
            } else {
                self.edge_count -= 1;
            }
        }
        Ok(())
    }

    /// `|N(tail) ∩ N(head)|`. Directed graphs use the undirected projection:
    /// a vertex is shared if it is adjacent (either direction) to both ends.
    pub fn shared_neighbors(&self, d: Dyad) -> Result<u32> {
        self.check_dyad(d)?;
        if !self.directed {
            let a = &self.out_nbrs[d.tail as usize];
            let b = &self.out_nbrs[d.head as usize];
            Ok(intersect_count(a, b))
        } else {
            let a = self.merged_nbrs(d.tail);
            let b = self.merged_nbrs(d.head);
            Ok(intersect_count(&a, &b))
        }
    }

    /// Allocation-free undirected shared-neighbor count for hot paths.
    /// Caller guarantees a valid undirected dyad.
    #[inline]
    pub(crate) fn shared_neighbors_undirected(&self, i: u32, j: u32) -> u32 {
        intersect_count(&self.out_nbrs[i as usize], &self.out_nbrs[j as usize])
    }

    /// Sorted union of in- and out-neighbors (directed projection).
    fn merged_nbrs(&self, v: u32) -> Vec<u32> {
        let out = &self.out_nbrs[v as usize];
        let inn = &self.in_nbrs[v as usize];
        let mut merged = Vec::with_capacity(out.len() + inn.len());
        let (mut a, mut b) = (0, 0);
        while a < out.len() && b < inn.len() {
            match out[a].cmp(&inn[b]) {
                std::cmp::Ordering::Less => {
                    merged.push(out[a]);
                    a += 1;
                }
                std::cmp::Ordering::Greater => {
                    merged.push(inn[b]);
                    b += 1;
                }
                std::cmp::Ordering::Equal => {
                    merged.push(out[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        merged.extend_from_slice(&out[a..]);
        merged.extend_from_slice(&inn[b..]);
        merged
    }

    /// The `index`-th dyad under the canonical row-major enumeration.
    /// Undirected: (0,1),(0,2),…,(0,n-1),(1,2),…; directed: tails ascending,
    /// each with heads `0..n` minus the tail.
    pub fn dyad_at(&self, index: u64) -> Result<Dyad> {
        let nd = self.dyad_count();
        if index >= nd {
            return Err(Error::DyadIndexOutOfRange { index, count: nd });
        }
        let n = self.n as u64;
        if self.directed {
            let tail = index / (n - 1);
            let r = index % (n - 1);
            let head = if r < tail { r } else { r + 1 };
            Ok(Dyad::new(tail as u32, head as u32))
        } else {
            // Row i holds n-1-i dyads; walk rows (n is never astronomically
            // large relative to this linear scan's callers).
            let mut i = 0u64;
            let mut offset = 0u64;
            loop {
                let row = n - 1 - i;
                if index < offset + row {
                    let j = i + 1 + (index - offset);
                    return Ok(Dyad::new(i as u32, j as u32));
                }
                offset += row;
                i += 1;
            }
        }
    }

    /// Inverse of [`dyad_at`](Self::dyad_at).
    pub fn dyad_index(&self, d: Dyad) -> Result<u64> {
        self.check_dyad(d)?;
        let n = self.n as u64;
        if self.directed {
            let (t, h) = (d.tail as u64, d.head as u64);
            let r = if h < t { h } else { h - 1 };
            Ok(t * (n - 1) + r)
        } else {
            let c = Dyad::canonical(d.tail, d.head);
            let (i, j) = (c.tail as u64, c.head as u64);
            // Dyads before row i: sum of (n-1-k) for k < i.
            let before = i * (n - 1) - i * (i.saturating_sub(1)) / 2;
            Ok(before + (j - i - 1))
        }
    }

    /// All present edges as canonical dyads, ascending by (tail, head).
    pub fn edges(&self) -> impl Iterator<Item = Dyad> + '_ {
        self.out_nbrs.iter().enumerate().flat_map(move |(i, nbrs)| {
            let i = i as u32;
            nbrs.iter()
                .filter(move |&&j| self.directed || j > i)
                .map(move |&j| Dyad::new(i, j))
        })
    }
}

fn insert_sorted(v: &mut Vec<u32>, x: u32) -> bool {
    match v.binary_search(&x) {
        Ok(_) => false,
        Err(pos) => {
            v.insert(pos, x);
            true
        }
    }
}

fn remove_sorted(v: &mut Vec<u32>, x: u32) -> bool {
    match v.binary_search(&x) {
        Ok(pos) => {
            v.remove(pos);
            true
        }
        Err(_) => false,
    }
}

#[inline]
fn intersect_count(a: &[u32], b: &[u32]) -> u32 {
    // Linear merge; O(|a| + |b|), and we could binary-search the longer side
    // instead, but degrees in sparse graphs keep both sides short.
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}
