//! Recursive sample sort and set indexing inside the simulator.
//!
//! Each level sorts locally, gathers weighted samples up an aggregation tree,
//! broadcasts splitters back down and routes every item to its group of
//! machines. Groups recurse until they are single machines.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::scan::{tree_scan, Monoid};
use super::sim::{MachineId, Sim, SimError, Store, HEADER_WORDS};
use super::tree::{depth, MachineRange};

/// A fixed-width record that can travel in messages.
pub trait Record: Clone {
    const WORDS: usize;
    fn encode(&self, out: &mut Vec<u64>);
    fn decode(w: &[u64]) -> Self;
}

/// Machine store holding records plus transient sort state.
#[derive(Clone, Debug)]
pub struct Items<R> {
    pub items: Vec<R>,
    tags: Vec<u64>,
    pub(crate) scratch: u64,
}

impl<R> Default for Items<R> {
    fn default() -> Self {
        Items { items: Vec::new(), tags: Vec::new(), scratch: 0 }
    }
}

impl<R: Record> Store for Items<R> {
    fn words(&self) -> u64 {
        (self.items.len() * R::WORDS + self.tags.len()) as u64 + self.scratch
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SortReport {
    pub levels: u32,
    pub rounds: u64,
}

/// (key, tag, weight); the tag is the original position.
type Sample = (u128, u64, u64);
const SAMPLE_WORDS: u64 = 4;

/// Samples per message; a node's gathered samples take at most S/2 words,
/// leaving the rest for its items.
fn budget(s: u64, b: u64) -> u64 {
    (s / (2 * b)).saturating_sub(HEADER_WORDS) / SAMPLE_WORDS
}

/// Rounds for sorting a range of `len` machines with fanout `b` at the top,
/// optimised over fanouts at every level.
fn plan(len: u64, s: u64, memo: &mut BTreeMap<u64, (u64, u64)>) -> (u64, u64) {
    if len <= 1 {
        return (0, 0);
    }
    if let Some(&r) = memo.get(&len) {
        return r;
    }
    let mut best = (u64::MAX, 0);
    let mut b = 2u64;
    while budget(s, b) >= 2 {
        let g = groups(len, budget(s, b));
        if g < 2 {
            break;
        }
        let next = len.div_ceil(g);
        let cost = 4 * depth(len, b) as u64 + 1 + plan(next, s, memo).0;
        if cost < best.0 || (cost == best.0 && b > best.1) {
            best = (cost, b);
        }
        b = (b * 3).div_ceil(2);
    }
    memo.insert(len, best);
    best
}

/// Weighted compression of sorted samples to at most `k`.
fn compress(samples: &[Sample], k: u64) -> Vec<Sample> {
    if samples.len() as u64 <= k {
        return samples.to_vec();
    }
    let total: u64 = samples.iter().map(|s| s.2).sum();
    let mut out: Vec<Sample> = Vec::with_capacity(k as usize);
    let mut acc = 0u64;
    for s in samples {
        // Bucket of this sample by cumulative weight before it.
        let bucket = (acc as u128 * k as u128 / total as u128) as usize;
        if bucket >= out.len() {
            out.push(*s);
        } else {
            out.last_mut().unwrap().2 += s.2;
        }
        acc += s.2;
    }
    out
}

/// Buckets per level, one splitter per sample after the first. Group sizes follow exact
/// bucket counts, so splitter quality only affects recursion depth.
fn groups(len: u64, k: u64) -> u64 {
    len.min(k).max(1)
}

/// Largest-remainder split of `len` machines over buckets by item count;
/// every nonempty bucket gets at least one machine.
pub(crate) fn apportion(totals: &[u64], len: u64) -> Vec<u64> {
    let n: u64 = totals.iter().sum();
    if n == 0 {
        return alloc::vec![0; totals.len()];
    }
    let mut a: Vec<u64> =
        totals.iter().map(|&t| if t == 0 { 0 } else { ((t as u128 * len as u128 / n as u128) as u64).max(1) }).collect();
    let mut sum: u64 = a.iter().sum();
    while sum > len {
        let i = (0..a.len()).filter(|&i| a[i] > 1).max_by_key(|&i| (a[i], core::cmp::Reverse(i))).expect("len covers buckets");
        a[i] -= 1;
        sum -= 1;
    }
    while sum < len {
        // Give the machine to the bucket with the heaviest per-machine load.
        let i = (0..a.len())
            .filter(|&i| totals[i] > 0)
            .max_by(|&x, &y| (totals[x] as u128 * a[y] as u128).cmp(&(totals[y] as u128 * a[x] as u128)).then(y.cmp(&x)))
            .unwrap();
        a[i] += 1;
        sum += 1;
    }
    a
}

/// Per-bucket item counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Counts(Vec<u64>);

impl Monoid for Counts {
    fn identity() -> Self {
        Counts(Vec::new())
    }
    fn op(&self, r: &Self) -> Self {
        let n = self.0.len().max(r.0.len());
        Counts((0..n).map(|i| self.0.get(i).unwrap_or(&0) + r.0.get(i).unwrap_or(&0)).collect())
    }
    fn encode(&self, out: &mut Vec<u64>) {
        out.push(self.0.len() as u64);
        out.extend_from_slice(&self.0);
    }
    fn decode(w: &[u64]) -> (Self, usize) {
        let n = w[0] as usize;
        (Counts(w[1..1 + n].to_vec()), 1 + n)
    }
}

enum Plan {
    /// Small enough to collect on the first machine.
    Gather,
    Split(Vec<(u128, u64)>),
}

/// Sort every item in `range` by `(key, original position)`. Afterwards
/// machine order followed by local order is the sorted order; loads are
/// balanced to within one item per bucket group.
pub fn mpc_sort<R: Record>(
    sim: &mut Sim<Items<R>>,
    range: MachineRange,
    key: impl Fn(&R) -> u128 + Copy,
    label: &str,
) -> Result<SortReport, SimError> {
    let start_rounds = sim.rounds();
    let s = sim.s();
    let p = sim.p() as usize;
    // Words per item while sorting: the record plus its position tag, plus
    // a header in the worst case of one item per message.
    let iw = R::WORDS as u64 + 1;
    for m in range.first..=range.last() {
        let st = &mut sim.stores_mut()[m as usize];
        st.tags = (0..st.items.len() as u64).map(|i| ((m as u64) << 32) | i).collect();
    }
    let local_sort = |st: &mut Items<R>| {
        let mut v: Vec<(u128, u64, R)> =
            core::mem::take(&mut st.items).into_iter().zip(core::mem::take(&mut st.tags)).map(|(r, t)| (key(&r), t, r)).collect();
        v.sort_unstable_by_key(|x| (x.0, x.1));
        for (_, t, r) in v {
            st.items.push(r);
            st.tags.push(t);
        }
    };
    let bucket_of = |spl: &[(u128, u64)], k: (u128, u64)| spl.partition_point(|&x| x <= k);
    let mut segments = alloc::vec![range];
    let mut levels = 0;
    let mut memo = BTreeMap::new();
    loop {
        let active: Vec<MachineRange> = segments.iter().copied().filter(|r| r.len > 1).collect();
        if active.is_empty() {
            break;
        }
        levels += 1;
        let maxlen = active.iter().map(|r| r.len as u64).max().unwrap();
        let b = plan(maxlen, s, &mut memo).1;
        let k = budget(s, b);
        let mut own = alloc::vec![u32::MAX; p];
        for (t, r) in active.iter().enumerate() {
            for m in r.first..=r.last() {
                own[m as usize] = t as u32;
            }
        }
        // Weighted samples: every block of a machine's sorted items is
        // represented by its first item.
        let mut reg: Vec<Vec<Sample>> = alloc::vec![Vec::new(); p];
        for r in &active {
            for m in r.first..=r.last() {
                let st = &mut sim.stores_mut()[m as usize];
                local_sort(st);
                let n = st.items.len() as u64;
                // A short segment needs few splitters; its machines may
                // already hold more than S/2 words of items.
                let take = n.min(k).min(32 * r.len as u64);
                reg[m as usize] = (0..take)
                    .map(|t| {
                        let lo = t * n / take;
                        (key(&st.items[lo as usize]), st.tags[lo as usize], (t + 1) * n / take - lo)
                    })
                    .collect();
            }
        }
        let nodes = |len: u64, level: u32| len.div_ceil(b.pow(level)).max(1);
        let rounds = depth(maxlen, b);
        let absorb = |reg: &mut Vec<Vec<Sample>>, st: &mut Items<R>, m: MachineId, inbox: &[super::Message], lvl: u32| {
            let r = active[own[m as usize] as usize];
            let j = (m - r.first) as u64;
            if j >= nodes(r.len as u64, lvl) {
                reg[m as usize].clear();
                st.scratch = 0;
                return;
            }
            let mut all = if j == 0 { core::mem::take(&mut reg[m as usize]) } else { Vec::new() };
            for msg in inbox {
                for c in msg.payload.chunks_exact(SAMPLE_WORDS as usize) {
                    all.push((((c[0] as u128) << 64) | c[1] as u128, c[2], c[3]));
                }
            }
            st.scratch = all.len() as u64 * SAMPLE_WORDS;
            all.sort_unstable();
            // The segment root picks splitters from everything it gathered.
            reg[m as usize] = if j == 0 && lvl >= depth(r.len as u64, b) { all } else { compress(&all, k) };
        };
        for level in 1..=rounds {
            sim.run_round(label, |m, st, inbox, out| {
                if own[m as usize] == u32::MAX {
                    return;
                }
                if level > 1 {
                    absorb(&mut reg, st, m, &inbox, level - 1);
                }
                let r = active[own[m as usize] as usize];
                let j = (m - r.first) as u64;
                if level <= depth(r.len as u64, b) && j != 0 && j < nodes(r.len as u64, level - 1) {
                    let mut pl = Vec::with_capacity(reg[m as usize].len() * 4);
                    for &(kk, t, w) in &reg[m as usize] {
                        pl.extend([(kk >> 64) as u64, kk as u64, t, w]);
                    }
                    out.send(r.first + (j / b) as MachineId, pl);
                }
            })?;
        }
        sim.local_step(|m, st, inbox| {
            if own[m as usize] != u32::MAX && rounds > 0 {
                absorb(&mut reg, st, m, &inbox, rounds);
            }
        })?;
        // Each root decides from exact sample weights: collect, or split at
        // weighted quantiles.
        let mut payloads = Vec::with_capacity(active.len());
        for r in &active {
            let smp = &reg[r.first as usize];
            let total: u64 = smp.iter().map(|x| x.2).sum();
            let mut pl = alloc::vec![0u64];
            if total * (iw + HEADER_WORDS) > s / 2 {
                let g = groups(r.len as u64, k);
                let mut acc = 0u64;
                let mut next = 1u64;
                for &(kk, t, w) in smp {
                    let mut hit = false;
                    while next < g && acc as u128 * g as u128 >= next as u128 * total as u128 {
                        hit = true;
                        next += 1;
                    }
                    if hit && acc > 0 {
                        pl.extend([(kk >> 64) as u64, kk as u64, t]);
                    }
                    acc += w;
                }
                if pl.len() == 1 {
                    return Err(SimError::CapacityExceeded { words: total * iw, capacity: s / 2 });
                }
                pl[0] = 1;
            }
            payloads.push(pl);
        }
        for st in sim.stores_mut() {
            st.scratch = 0;
        }
        let mut plans: Vec<Option<Plan>> = (0..p).map(|_| None).collect();
        super::tree::broadcast(
            sim,
            &active,
            &payloads,
            b,
            |m, st, pl| {
                st.scratch = pl.len() as u64;
                plans[m as usize] = Some(if pl[0] == 0 {
                    Plan::Gather
                } else {
                    Plan::Split(pl[1..].chunks_exact(3).map(|c| (((c[0] as u128) << 64) | c[1] as u128, c[2])).collect())
                });
            },
            label,
        )?;
        // Exact bucket ranks for split segments.
        let split: Vec<usize> = (0..active.len()).filter(|&t| payloads[t][0] == 1).collect();
        let split_ranges: Vec<MachineRange> = split.iter().map(|&t| active[t]).collect();
        let mut offsets: Vec<Vec<u64>> = alloc::vec![Vec::new(); p];
        let mut alloc_of: Vec<Vec<u64>> = alloc::vec![Vec::new(); active.len()];
        let mut totals_of: Vec<Vec<u64>> = alloc::vec![Vec::new(); active.len()];
        if !split.is_empty() {
            let totals = tree_scan(
                sim,
                &split_ranges,
                b,
                |m, st| {
                    let Some(Plan::Split(spl)) = &plans[m as usize] else { return Counts::identity() };
                    let mut c = alloc::vec![0u64; spl.len() + 1];
                    for (r, &t) in st.items.iter().zip(&st.tags) {
                        c[bucket_of(spl, (key(r), t))] += 1;
                    }
                    Counts(c)
                },
                |m, _, left, _| offsets[m as usize] = left.0.clone(),
                label,
            )?;
            for (i, &t) in split.iter().enumerate() {
                let nb = payloads[t].len() / 3 + 1;
                let mut tot = totals[i].0.clone();
                tot.resize(nb, 0);
                alloc_of[t] = apportion(&tot, active[t].len as u64);
                totals_of[t] = tot;
            }
        }
        sim.run_round(label, |m, st, _, out| {
            let t = own[m as usize];
            if t == u32::MAX {
                return;
            }
            let r = active[t as usize];
            let items = core::mem::take(&mut st.items);
            let tags = core::mem::take(&mut st.tags);
            st.scratch = 0;
            let mut per_dest: BTreeMap<MachineId, Vec<u64>> = BTreeMap::new();
            match plans[m as usize].as_ref().expect("plan delivered") {
                Plan::Gather => {
                    if m == r.first {
                        st.items = items;
                        st.tags = tags;
                        return;
                    }
                    let pl = per_dest.entry(r.first).or_default();
                    for (rec, t) in items.into_iter().zip(tags) {
                        pl.push(t);
                        rec.encode(pl);
                    }
                }
                Plan::Split(spl) => {
                    let a = &alloc_of[t as usize];
                    let tot = &totals_of[t as usize];
                    let mut start = alloc::vec![r.first; a.len() + 1];
                    for c in 0..a.len() {
                        start[c + 1] = start[c] + a[c] as MachineId;
                    }
                    let mut seen = offsets[m as usize].clone();
                    seen.resize(a.len(), 0);
                    for (rec, tg) in items.into_iter().zip(tags) {
                        let c = bucket_of(spl, (key(&rec), tg));
                        let per = tot[c].div_ceil(a[c]);
                        let dest = start[c] + (seen[c] / per) as MachineId;
                        seen[c] += 1;
                        let pl = per_dest.entry(dest).or_default();
                        pl.push(tg);
                        rec.encode(pl);
                    }
                }
            }
            for (d, pl) in per_dest {
                out.send(d, pl);
            }
        })?;
        sim.local_step(|m, st, inbox| {
            if own[m as usize] == u32::MAX {
                return;
            }
            for msg in inbox {
                for c in msg.payload.chunks_exact(1 + R::WORDS) {
                    st.tags.push(c[0]);
                    st.items.push(R::decode(&c[1..]));
                }
            }
        })?;
        let mut next = Vec::new();
        for r in segments {
            let Some(t) = active.iter().position(|a| a.first == r.first && r.len > 1) else {
                continue;
            };
            if payloads[t][0] == 0 {
                continue;
            }
            let mut first = r.first;
            for &a in &alloc_of[t] {
                if a > 0 {
                    next.push(MachineRange { first, len: a as u32 });
                }
                first += a as MachineId;
            }
        }
        segments = next;
    }
    for m in range.first..=range.last() {
        let st = &mut sim.stores_mut()[m as usize];
        local_sort(st);
        st.tags.clear();
    }
    Ok(SortReport { levels, rounds: sim.rounds() - start_rounds })
}

/// Run-length view of the set ids at both ends of a machine sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Runs {
    pub empty: bool,
    pub uniform: bool,
    pub first_set: u64,
    pub first_run: u64,
    pub last_set: u64,
    pub last_run: u64,
}

impl Runs {
    pub fn of(sets: impl Iterator<Item = u64> + Clone) -> Runs {
        let mut it = sets.clone();
        let Some(first) = it.next() else { return Runs::identity() };
        let all: Vec<u64> = sets.collect();
        let last = *all.last().unwrap();
        let first_run = all.iter().take_while(|&&s| s == first).count() as u64;
        let last_run = all.iter().rev().take_while(|&&s| s == last).count() as u64;
        Runs { empty: false, uniform: first_run == all.len() as u64, first_set: first, first_run, last_set: last, last_run }
    }
}

impl Monoid for Runs {
    fn identity() -> Self {
        Runs { empty: true, uniform: true, first_set: 0, first_run: 0, last_set: 0, last_run: 0 }
    }
    fn op(&self, b: &Self) -> Self {
        if self.empty {
            return *b;
        }
        if b.empty {
            return *self;
        }
        let uniform = self.uniform && b.uniform && self.first_set == b.first_set;
        let first_run = if self.uniform && self.first_set == b.first_set { self.first_run + b.first_run } else { self.first_run };
        let last_run = if b.uniform && b.last_set == self.last_set { self.last_run + b.last_run } else { b.last_run };
        Runs { empty: false, uniform, first_set: self.first_set, first_run, last_set: b.last_set, last_run }
    }
    fn encode(&self, out: &mut Vec<u64>) {
        out.extend([self.empty as u64, self.uniform as u64, self.first_set, self.first_run, self.last_set, self.last_run]);
    }
    fn decode(w: &[u64]) -> (Self, usize) {
        (Runs { empty: w[0] != 0, uniform: w[1] != 0, first_set: w[2], first_run: w[3], last_set: w[4], last_run: w[5] }, 6)
    }
}

/// Sort by `(set, key)` and hand every item its 1-based rank within its set
/// and the set size: `assign(item, rank, size)`.
pub fn mpc_index<R: Record>(
    sim: &mut Sim<Items<R>>,
    range: MachineRange,
    set_key: impl Fn(&R) -> (u32, u64) + Copy,
    mut assign: impl FnMut(&mut R, u64, u64),
    label: &str,
) -> Result<SortReport, SimError> {
    let start = sim.rounds();
    let levels = mpc_sort(
        sim,
        range,
        move |r| {
            let (s, k) = set_key(r);
            ((s as u128) << 64) | k as u128
        },
        label,
    )?
    .levels;
    let b = super::tree::fanout(sim.s(), 13);
    tree_scan(
        sim,
        &[range],
        b,
        |_, st: &Items<R>| Runs::of(st.items.iter().map(|r| set_key(r).0 as u64)),
        |_, st, left, right| {
            let n = st.items.len();
            let mut i = 0;
            while i < n {
                let set = set_key(&st.items[i]).0 as u64;
                let mut e = i;
                while e < n && set_key(&st.items[e]).0 as u64 == set {
                    e += 1;
                }
                let before = if i == 0 && !left.empty && left.last_set == set { left.last_run } else { 0 };
                let after = if e == n && !right.empty && right.first_set == set { right.first_run } else { 0 };
                let size = before + (e - i) as u64 + after;
                for (t, it) in st.items[i..e].iter_mut().enumerate() {
                    assign(it, before + t as u64 + 1, size);
                }
                i = e;
            }
        },
        label,
    )?;
    Ok(SortReport { levels, rounds: sim.rounds() - start })
}
