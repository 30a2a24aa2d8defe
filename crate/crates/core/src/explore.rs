//! Reference semantics of hop-limited keyed Bellman-Ford explorations.
//!
//! Every executor (centralized, MPC, clique) computes exactly this: a table
//! per vertex mapping a key to the lexicographically smallest `(dist, tag)`
//! over walks of at most `h` edges whose every prefix is admitted by the
//! filter at the vertex it reaches. Only entries that changed in an iteration
//! are relaxed in the next one.

use alloc::vec::Vec;

use crate::graph::{VertexId, Weight, WeightedGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub key: u32,
    pub dist: u64,
    pub tag: u32,
}

impl Entry {
    pub fn better_than(&self, other: &Entry) -> bool {
        (self.dist, self.tag) < (other.dist, other.tag)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tables {
    /// Per vertex, entries sorted by key.
    pub tables: Vec<Vec<Entry>>,
    /// Relaxation iterations that changed at least one entry.
    pub iterations: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("vertex {vertex} admitted {admitted} keys, cap {cap}")]
pub struct CapExceeded {
    pub vertex: VertexId,
    pub admitted: usize,
    pub cap: usize,
}

/// Insert/improve `e` in a key-sorted table. Returns true if it changed.
pub fn improve(table: &mut Vec<Entry>, e: Entry) -> bool {
    match table.binary_search_by_key(&e.key, |x| x.key) {
        Ok(i) => {
            if e.better_than(&table[i]) {
                table[i] = e;
                true
            } else {
                false
            }
        }
        Err(i) => {
            table.insert(i, e);
            true
        }
    }
}

pub fn lookup(table: &[Entry], key: u32) -> Option<&Entry> {
    table.binary_search_by_key(&key, |x| x.key).ok().map(|i| &table[i])
}

/// `init` holds `(vertex, entry)` seeds; each is kept only if admitted.
pub fn keyed_bf<F>(
    g: &WeightedGraph,
    init: &[(VertexId, Entry)],
    h: u64,
    admit: F,
    cap: usize,
) -> Result<Tables, CapExceeded>
where
    F: Fn(VertexId, u64) -> bool,
{
    let n = g.n();
    let mut tables: Vec<Vec<Entry>> = alloc::vec![Vec::new(); n];
    let mut delta: Vec<(VertexId, Entry)> = Vec::new();
    for &(v, e) in init {
        if admit(v, e.dist) && improve(&mut tables[v as usize], e) {
            delta.push((v, e));
        }
    }
    check_cap(&tables, cap)?;
    // A vertex seeded twice under one key keeps only the best seed.
    delta.sort();
    delta.retain(|(v, e)| lookup(&tables[*v as usize], e.key) == Some(e));
    delta.dedup();

    let mut iterations = 0;
    let mut cand: Vec<(VertexId, Entry)> = Vec::new();
    for _ in 0..h {
        if delta.is_empty() {
            break;
        }
        cand.clear();
        for &(u, e) in &delta {
            for &(v, w) in g.neighbors(u) {
                let d = e.dist + w;
                if !admit(v, d) {
                    continue;
                }
                let c = Entry { key: e.key, dist: d, tag: e.tag };
                match lookup(&tables[v as usize], e.key) {
                    Some(cur) if !c.better_than(cur) => {}
                    _ => cand.push((v, c)),
                }
            }
        }
        cand.sort_by_key(|&(v, e)| (v, e.key, e.dist, e.tag));
        cand.dedup_by_key(|&mut (v, e)| (v, e.key));
        delta.clear();
        for &(v, e) in &cand {
            if improve(&mut tables[v as usize], e) {
                delta.push((v, e));
            }
        }
        if !delta.is_empty() {
            iterations += 1;
            for &(v, _) in &delta {
                if tables[v as usize].len() > cap {
                    return Err(CapExceeded { vertex: v, admitted: tables[v as usize].len(), cap });
                }
            }
        }
    }
    Ok(Tables { tables, iterations })
}

fn check_cap(tables: &[Vec<Entry>], cap: usize) -> Result<(), CapExceeded> {
    for (v, t) in tables.iter().enumerate() {
        if t.len() > cap {
            return Err(CapExceeded { vertex: v as VertexId, admitted: t.len(), cap });
        }
    }
    Ok(())
}

/// Single-label exploration: one key, labels compared by `(dist, tag)`.
/// Returns per-vertex `(dist, tag)` or `None`.
pub fn single_label_bf<F>(
    g: &WeightedGraph,
    seeds: &[(VertexId, u64, u32)],
    h: u64,
    admit: F,
) -> (Vec<Option<(u64, u32)>>, u64)
where
    F: Fn(VertexId, u64) -> bool,
{
    let init: Vec<(VertexId, Entry)> =
        seeds.iter().map(|&(v, d, tag)| (v, Entry { key: 0, dist: d, tag })).collect();
    let t = keyed_bf(g, &init, h, admit, usize::MAX).expect("single key never exceeds cap");
    let labels = t.tables.iter().map(|tb| tb.first().map(|e| (e.dist, e.tag))).collect();
    (labels, t.iterations)
}

/// Runs explorations with the semantics of [`keyed_bf`]. Pipelines written
/// against it run unchanged on every executor.
pub trait Executor {
    fn keyed(
        &mut self,
        g: &WeightedGraph,
        init: &[(VertexId, Entry)],
        h: u64,
        admit: &dyn Fn(VertexId, u64) -> bool,
        cap: usize,
    ) -> Result<Tables, CapExceeded>;

    /// As [`single_label_bf`].
    fn single_label(
        &mut self,
        g: &WeightedGraph,
        seeds: &[(VertexId, u64, u32)],
        h: u64,
        admit: &dyn Fn(VertexId, u64) -> bool,
    ) -> Vec<Option<(u64, u32)>> {
        let init: Vec<(VertexId, Entry)> = seeds.iter().map(|&(v, d, tag)| (v, Entry { key: 0, dist: d, tag })).collect();
        let t = self.keyed(g, &init, h, admit, usize::MAX).expect("single key never exceeds cap");
        t.tables.iter().map(|tb| tb.first().map(|e| (e.dist, e.tag))).collect()
    }

    /// Edges just added to the explored graph; each endpoint learns them.
    fn added(&mut self, edges: &[(VertexId, VertexId, Weight)]) {
        let _ = edges;
    }
}

/// The reference functions of this module.
pub struct Sequential;

impl Executor for Sequential {
    fn keyed(
        &mut self,
        g: &WeightedGraph,
        init: &[(VertexId, Entry)],
        h: u64,
        admit: &dyn Fn(VertexId, u64) -> bool,
        cap: usize,
    ) -> Result<Tables, CapExceeded> {
        keyed_bf(g, init, h, admit, cap)
    }
}
