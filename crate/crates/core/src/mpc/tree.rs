//! Implicit aggregation trees over contiguous machine ranges: the level-ℓ
//! node `j` of range `[x, x+len)` lives on machine `x + j` and aggregates the
//! level-(ℓ−1) nodes `[j·b, (j+1)·b)`.

use alloc::vec::Vec;

use super::sim::{MachineId, Message, Sim, SimError, Store, HEADER_WORDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MachineRange {
    pub first: MachineId,
    pub len: u32,
}

impl MachineRange {
    pub fn new(first: MachineId, last: MachineId) -> MachineRange {
        assert!(first <= last, "empty machine range");
        MachineRange { first, len: last - first + 1 }
    }

    pub fn last(&self) -> MachineId {
        self.first + self.len - 1
    }

    pub fn contains(&self, m: MachineId) -> bool {
        m >= self.first && m - self.first < self.len
    }
}

/// ⌈log_b len⌉, the number of communication rounds for one sweep.
pub fn depth(len: u64, b: u64) -> u32 {
    assert!(b >= 2, "fanout below 2");
    let mut d = 0;
    let mut reach = 1u64;
    while reach < len {
        reach = reach.saturating_mul(b);
        d += 1;
    }
    d
}

/// Parent machine of machine `i` at level `level`, `x + ⌊(i−x)/b^level⌋`.
pub fn parent(x: MachineId, i: MachineId, b: u64, level: u32) -> MachineId {
    x + ((i - x) as u64 / b.pow(level)) as MachineId
}

/// Largest fanout for which a node can receive `b` messages of `payload`
/// words, at least 2.
pub fn fanout(s: u64, payload: u64) -> u64 {
    (s / (payload + HEADER_WORDS)).max(2)
}

fn nodes_at(len: u64, b: u64, level: u32) -> u64 {
    len.div_ceil(b.saturating_pow(level)).max(1)
}

fn owners(p: u64, ranges: &[MachineRange]) -> Result<Vec<u32>, SimError> {
    let mut own = alloc::vec![u32::MAX; p as usize];
    for (t, r) in ranges.iter().enumerate() {
        if r.len == 0 {
            return Err(SimError::EmptyRange);
        }
        if r.last() as u64 >= p {
            return Err(SimError::InsufficientExtraSpace { needed: r.last() as u64 + 1, available: p });
        }
        for m in r.first..=r.last() {
            assert_eq!(own[m as usize], u32::MAX, "ranges overlap");
            own[m as usize] = t as u32;
        }
    }
    Ok(own)
}

fn lex_min(a: Option<(u64, u64)>, b: Option<(u64, u64)>) -> Option<(u64, u64)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Concurrent minimum over disjoint ranges; `leaf` gives each machine's
/// candidate as (value, id). Result per range, in exactly
/// `max ⌈log_b len⌉` rounds.
pub fn find_minimum<T: Store>(
    sim: &mut Sim<T>,
    ranges: &[MachineRange],
    b: u64,
    leaf: impl Fn(MachineId, &T) -> Option<(u64, u64)>,
    label: &str,
) -> Result<Vec<Option<(u64, u64)>>, SimError> {
    if b * (2 + HEADER_WORDS) > sim.s() {
        return Err(SimError::PayloadTooLarge { words: b * (2 + HEADER_WORDS), limit: sim.s() });
    }
    let own = owners(sim.p(), ranges)?;
    let mut reg: Vec<Option<(u64, u64)>> =
        (0..sim.p() as MachineId).map(|m| if own[m as usize] == u32::MAX { None } else { leaf(m, sim.store(m)) }).collect();
    let rounds = ranges.iter().map(|r| depth(r.len as u64, b)).max().unwrap_or(0);
    let absorb = |reg: &mut Vec<Option<(u64, u64)>>, m: MachineId, inbox: &[Message], level: u32| {
        let r = ranges[own[m as usize] as usize];
        let j = (m - r.first) as u64;
        if j >= nodes_at(r.len as u64, b, level) {
            reg[m as usize] = None;
            return;
        }
        // Node 0 is its own first child; every other node starts empty.
        let mut acc = if j == 0 { reg[m as usize] } else { None };
        for msg in inbox {
            acc = lex_min(acc, Some((msg.payload[0], msg.payload[1])));
        }
        reg[m as usize] = acc;
    };
    for level in 1..=rounds {
        sim.run_round(label, |m, _, inbox, out| {
            if own[m as usize] == u32::MAX {
                return;
            }
            if level > 1 {
                absorb(&mut reg, m, &inbox, level - 1);
            }
            let r = ranges[own[m as usize] as usize];
            let j = (m - r.first) as u64;
            if level <= depth(r.len as u64, b) && j < nodes_at(r.len as u64, b, level - 1) && j != 0 {
                if let Some((v, id)) = reg[m as usize] {
                    out.send(r.first + (j / b) as MachineId, alloc::vec![v, id]);
                }
            }
        })?;
    }
    if rounds > 0 {
        sim.local_step(|m, _, inbox| {
            if own[m as usize] != u32::MAX {
                absorb(&mut reg, m, &inbox, rounds);
            }
        })?;
    }
    Ok(ranges.iter().map(|r| reg[r.first as usize]).collect())
}

/// Top-down broadcast of one payload per range from its first machine;
/// `deliver` runs once on every machine of the range.
pub fn broadcast<T: Store>(
    sim: &mut Sim<T>,
    ranges: &[MachineRange],
    payloads: &[Vec<u64>],
    b: u64,
    mut deliver: impl FnMut(MachineId, &mut T, &[u64]),
    label: &str,
) -> Result<(), SimError> {
    assert_eq!(ranges.len(), payloads.len());
    for p in payloads {
        let w = p.len() as u64 + HEADER_WORDS;
        if w * b > sim.s() {
            return Err(SimError::PayloadTooLarge { words: w * b, limit: sim.s() });
        }
    }
    let own = owners(sim.p(), ranges)?;
    let depths: Vec<u32> = ranges.iter().map(|r| depth(r.len as u64, b)).collect();
    let rounds = depths.iter().copied().max().unwrap_or(0);
    let mut held: Vec<bool> = alloc::vec![false; sim.p() as usize];
    for (t, r) in ranges.iter().enumerate() {
        let m = r.first;
        deliver(m, &mut sim.stores_mut()[m as usize], &payloads[t]);
        held[m as usize] = true;
    }
    // Every machine forwards once, right after it first holds the payload,
    // to its children `[j·b, (j+1)·b)`.
    for step in 1..=rounds {
        sim.run_round(label, |m, st, inbox, out| {
            let t = own[m as usize];
            if t == u32::MAX {
                return;
            }
            let r = ranges[t as usize];
            let j = (m - r.first) as u64;
            let start = rounds - depths[t as usize] + 1;
            let mut fresh = j == 0 && step == start;
            for msg in inbox {
                if !held[m as usize] {
                    deliver(m, st, &msg.payload);
                    held[m as usize] = true;
                    fresh = true;
                }
            }
            if !fresh || step < start {
                return;
            }
            for c in (j * b).max(1)..((j + 1) * b).min(r.len as u64) {
                out.send(r.first + c as MachineId, payloads[t as usize].clone());
            }
        })?;
    }
    if rounds > 0 {
        sim.local_step(|m, st, inbox| {
            for msg in inbox {
                if !held[m as usize] {
                    deliver(m, st, &msg.payload);
                    held[m as usize] = true;
                }
            }
        })?;
    }
    Ok(())
}

/// Coordinate-wise minimum of a length-α vector: coordinate `c` is reduced
/// on its own block `[x + c·len, x + (c+1)·len)`, so all coordinates finish
/// in the scalar number of rounds. `leaf(machine, store, c)`.
pub fn find_minimum_vec<T: Store>(
    sim: &mut Sim<T>,
    x: MachineId,
    len: u32,
    alpha: u32,
    b: u64,
    leaf: impl Fn(MachineId, &T, u32) -> Option<(u64, u64)>,
    label: &str,
) -> Result<Vec<Option<(u64, u64)>>, SimError> {
    let ranges = striped(sim.p(), x, len, alpha)?;
    find_minimum(sim, &ranges, b, |m, st| leaf(m, st, (m - x) / len), label)
}

/// Vector broadcast: coordinate `c` goes to block `c`.
pub fn broadcast_vec<T: Store>(
    sim: &mut Sim<T>,
    x: MachineId,
    len: u32,
    coords: &[Vec<u64>],
    b: u64,
    mut deliver: impl FnMut(MachineId, &mut T, u32, &[u64]),
    label: &str,
) -> Result<(), SimError> {
    let ranges = striped(sim.p(), x, len, coords.len() as u32)?;
    broadcast(sim, &ranges, coords, b, |m, st, p| deliver(m, st, (m - x) / len, p), label)
}

fn striped(p: u64, x: MachineId, len: u32, alpha: u32) -> Result<Vec<MachineRange>, SimError> {
    if len == 0 || alpha == 0 {
        return Err(SimError::EmptyRange);
    }
    let needed = x as u64 + len as u64 * alpha as u64;
    if needed > p {
        return Err(SimError::InsufficientExtraSpace { needed, available: p });
    }
    Ok((0..alpha).map(|c| MachineRange { first: x + c * len, len }).collect())
}
