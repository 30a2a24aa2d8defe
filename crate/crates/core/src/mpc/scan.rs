//! Tree prefix scans: every machine learns the aggregate of all machines
//! before it and after it in its range, in `2·⌈log_b len⌉` rounds.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::sim::{MachineId, Sim, SimError, Store, HEADER_WORDS};
use super::tree::{depth, MachineRange};

/// An associative operation with identity and a word encoding.
pub trait Monoid: Clone {
    fn identity() -> Self;
    fn op(&self, rhs: &Self) -> Self;
    fn encode(&self, out: &mut Vec<u64>);
    /// Decodes a prefix of `w`, returning the words consumed.
    fn decode(w: &[u64]) -> (Self, usize);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Sum(pub u64);

impl Monoid for Sum {
    fn identity() -> Self {
        Sum(0)
    }
    fn op(&self, rhs: &Self) -> Self {
        Sum(self.0 + rhs.0)
    }
    fn encode(&self, out: &mut Vec<u64>) {
        out.push(self.0);
    }
    fn decode(w: &[u64]) -> (Self, usize) {
        (Sum(w[0]), 1)
    }
}

fn nodes_at(len: u64, b: u64, level: u32) -> u64 {
    len.div_ceil(b.saturating_pow(level)).max(1)
}

fn decode_pair<M: Monoid>(w: &[u64]) -> (M, M) {
    let (l, used) = M::decode(w);
    (l, M::decode(&w[used..]).0)
}

fn fold<M: Monoid>(xs: &[M]) -> M {
    xs.iter().fold(M::identity(), |a, x| a.op(x))
}

/// Exclusive left and right contexts for every machine of every range.
/// `apply(machine, store, left, right)` runs once per machine; returns each
/// range's total.
pub fn tree_scan<T: Store, M: Monoid>(
    sim: &mut Sim<T>,
    ranges: &[MachineRange],
    b: u64,
    local: impl Fn(MachineId, &T) -> M,
    mut apply: impl FnMut(MachineId, &mut T, &M, &M),
    label: &str,
) -> Result<Vec<M>, SimError> {
    if b < 2 || b * (1 + HEADER_WORDS) > sim.s() {
        return Err(SimError::PayloadTooLarge { words: b * (1 + HEADER_WORDS), limit: sim.s() });
    }
    let p = sim.p() as usize;
    let mut own = alloc::vec![u32::MAX; p];
    for (t, r) in ranges.iter().enumerate() {
        if r.len == 0 {
            return Err(SimError::EmptyRange);
        }
        if r.last() as usize >= p {
            return Err(SimError::InsufficientExtraSpace { needed: r.last() as u64 + 1, available: p as u64 });
        }
        for m in r.first..=r.last() {
            own[m as usize] = t as u32;
        }
    }
    let leaves: Vec<Option<M>> =
        (0..p).map(|m| if own[m] == u32::MAX { None } else { Some(local(m as MachineId, sim.store(m as MachineId))) }).collect();
    let rounds = ranges.iter().map(|r| depth(r.len as u64, b)).max().unwrap_or(0);
    // (machine, level) → child aggregates, and → (left, right) context.
    let mut kids: BTreeMap<(MachineId, u32), Vec<M>> = BTreeMap::new();
    let mut ctx: BTreeMap<(MachineId, u32), (M, M)> = BTreeMap::new();
    let node_agg = |kids: &BTreeMap<(MachineId, u32), Vec<M>>, m: MachineId, level: u32| -> M {
        if level == 0 {
            leaves[m as usize].clone().unwrap_or_else(M::identity)
        } else {
            kids.get(&(m, level)).map(|k| fold(k)).unwrap_or_else(M::identity)
        }
    };
    let put_kid = |kids: &mut BTreeMap<(MachineId, u32), Vec<M>>, m: MachineId, level: u32, c: usize, v: M| {
        let e = kids.entry((m, level)).or_insert_with(|| alloc::vec![M::identity(); b as usize]);
        e[c] = v;
    };
    let info = |m: MachineId| -> Option<(MachineRange, u64, u32)> {
        let t = own[m as usize];
        if t == u32::MAX {
            return None;
        }
        let r = ranges[t as usize];
        Some((r, (m - r.first) as u64, depth(r.len as u64, b)))
    };
    // Up-sweep: round ℓ sends level-(ℓ−1) aggregates to their parents.
    for level in 1..=rounds {
        sim.run_round(label, |m, _, inbox, out| {
            let Some((r, j, d)) = info(m) else { return };
            for msg in &inbox {
                put_kid(&mut kids, m, level - 1, msg.payload[0] as usize, M::decode(&msg.payload[1..]).0);
            }
            if level > d || j >= nodes_at(r.len as u64, b, level - 1) {
                return;
            }
            let agg = node_agg(&kids, m, level - 1);
            let parent = r.first + (j / b) as MachineId;
            if parent == m {
                put_kid(&mut kids, m, level, 0, agg);
            } else {
                let mut pl = alloc::vec![j % b];
                agg.encode(&mut pl);
                out.send(parent, pl);
            }
        })?;
    }
    // Down-sweep: level-ℓ nodes hand contexts to their children.
    for step in 1..=rounds {
        let level = rounds + 1 - step;
        sim.run_round(label, |m, _, inbox, out| {
            let Some((r, j, d)) = info(m) else { return };
            for msg in &inbox {
                if step == 1 {
                    put_kid(&mut kids, m, rounds, msg.payload[0] as usize, M::decode(&msg.payload[1..]).0);
                } else {
                    ctx.insert((m, level), decode_pair(&msg.payload));
                }
            }
            if level > d || j >= nodes_at(r.len as u64, b, level) {
                return;
            }
            let (left, right) = if level == d { (M::identity(), M::identity()) } else { ctx[&(m, level)].clone() };
            let ks = kids.get(&(m, level)).cloned().unwrap_or_else(|| alloc::vec![M::identity(); b as usize]);
            let children = nodes_at(r.len as u64, b, level - 1);
            let mut run = left;
            for c in 0..b as usize {
                let child = j * b + c as u64;
                if child >= children {
                    break;
                }
                let rc = fold(&ks[c + 1..]).op(&right);
                let dest = r.first + child as MachineId;
                if dest == m {
                    ctx.insert((m, level - 1), (run.clone(), rc));
                } else {
                    let mut pl = Vec::new();
                    run.encode(&mut pl);
                    rc.encode(&mut pl);
                    out.send(dest, pl);
                }
                run = run.op(&ks[c]);
            }
        })?;
    }
    let id = M::identity();
    sim.local_step(|m, st, inbox| {
        if own[m as usize] == u32::MAX {
            return;
        }
        for msg in &inbox {
            ctx.insert((m, 0), decode_pair(&msg.payload));
        }
        match ctx.get(&(m, 0)) {
            Some((l, r)) => apply(m, st, l, r),
            None => apply(m, st, &id, &id),
        }
    })?;
    Ok(ranges
        .iter()
        .map(|r| {
            let d = depth(r.len as u64, b);
            node_agg(&kids, r.first, d)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::sim::SimConfig;
    use crate::ratio::Ratio;

    #[derive(Default)]
    struct Cell {
        v: u64,
        left: u64,
        right: u64,
        seen: bool,
    }

    impl Store for Cell {
        fn words(&self) -> u64 {
            3
        }
    }

    /// Affine maps x ↦ a·x + c mod 1009 under composition; not commutative.
    #[derive(Clone, Debug, PartialEq, Eq)]
    struct Affine(u64, u64);

    impl Monoid for Affine {
        fn identity() -> Self {
            Affine(1, 0)
        }
        fn op(&self, r: &Self) -> Self {
            Affine(self.0 * r.0 % 1009, (self.1 * r.0 + r.1) % 1009)
        }
        fn encode(&self, out: &mut Vec<u64>) {
            out.extend([self.0, self.1]);
        }
        fn decode(w: &[u64]) -> (Self, usize) {
            (Affine(w[0], w[1]), 2)
        }
    }

    fn sim(p: u64) -> Sim<Cell> {
        let mut c = SimConfig::new(64, p * 64, Ratio::ONE);
        c.c_slack = 1;
        c.c_p = 1;
        c.s_min = 16;
        Sim::new(c).unwrap()
    }

    #[test]
    fn prefix_sums_match() {
        for (len, b) in [(1u32, 2u64), (7, 2), (16, 4), (37, 3), (100, 5)] {
            let mut s = sim(len as u64 + 3);
            for m in 0..s.p() as usize {
                s.stores_mut()[m].v = (m as u64 * 7919) % 13;
            }
            let r = MachineRange { first: 2, len };
            let tot = tree_scan(&mut s, &[r], b, |_, st| Sum(st.v), |_, st, l, rr| {
                st.left = l.0;
                st.right = rr.0;
                st.seen = true;
            }, "scan")
            .unwrap();
            assert_eq!(s.rounds(), 2 * depth(len as u64, b) as u64);
            let vals: Vec<u64> = (2..2 + len).map(|m| s.store(m).v).collect();
            assert_eq!(tot[0].0, vals.iter().sum::<u64>());
            for (i, m) in (2..2 + len).enumerate() {
                let st = s.store(m);
                assert!(st.seen);
                assert_eq!(st.left, vals[..i].iter().sum::<u64>(), "len={len} b={b} i={i}");
                assert_eq!(st.right, vals[i + 1..].iter().sum::<u64>());
            }
            assert!(!s.store(0).seen);
        }
    }

    #[test]
    fn order_is_respected() {
        let mut s = sim(40);
        let maps: Vec<Affine> = (0..40u64).map(|m| Affine(m % 7 + 2, m * 31 % 1009)).collect();
        let rs = [MachineRange { first: 0, len: 13 }, MachineRange { first: 13, len: 27 }];
        let mut got: Vec<(Affine, Affine)> = alloc::vec![(Affine(0, 0), Affine(0, 0)); 40];
        tree_scan(&mut s, &rs, 3, |m, _| maps[m as usize].clone(), |m, _, l, r| got[m as usize] = (l.clone(), r.clone()), "scan").unwrap();
        for r in rs {
            for m in r.first..=r.last() {
                let left = fold(&maps[r.first as usize..m as usize]);
                let right = fold(&maps[m as usize + 1..=r.last() as usize]);
                assert_eq!(got[m as usize], (left, right), "m={m}");
            }
        }
    }
}
