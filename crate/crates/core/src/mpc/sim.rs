//! Synchronous MPC kernel with per-round I/O and memory audits.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ratio::Ratio;

pub type Word = u64;
pub type MachineId = u32;

/// Every message pays this many words on top of its payload.
pub const HEADER_WORDS: u64 = 2;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("configuration: {0}")]
    Config(&'static str),
    #[error("round {round} ({phase}): machine {machine} {dir} {words} words, limit {limit}")]
    IoViolation { round: u64, phase: String, machine: MachineId, dir: &'static str, words: u64, limit: u64 },
    #[error("round {round} ({phase}): machine {machine} holds {words} words, limit {limit}")]
    MemViolation { round: u64, phase: String, machine: MachineId, words: u64, limit: u64 },
    #[error("input of {words} words exceeds capacity {capacity}")]
    CapacityExceeded { words: u64, capacity: u64 },
    #[error("payload of {words} words exceeds {limit}")]
    PayloadTooLarge { words: u64, limit: u64 },
    #[error("range needs {needed} machines, only {available} available")]
    InsufficientExtraSpace { needed: u64, available: u64 },
    #[error("empty range")]
    EmptyRange,
    #[error("message to machine {0} outside the cluster")]
    BadDestination(MachineId),
}

impl SimError {
    pub fn is_model_violation(&self) -> bool {
        matches!(self, SimError::IoViolation { .. } | SimError::MemViolation { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub n: u64,
    pub m: u64,
    pub gamma: Ratio,
    pub c_slack: u64,
    pub s_min: u64,
    /// α: the machine pool is α times larger than the input needs.
    pub extra_factor: u64,
    pub c_p: u64,
    /// Lower bound on the pool before α is applied; layouts with one machine
    /// per vertex need it on sparse inputs.
    pub min_machines: u64,
    pub strict_io: bool,
    pub seed: u64,
}

/// ⌈n^γ⌉ for rational γ, exact.
pub fn ceil_pow(n: u64, gamma: Ratio) -> u64 {
    if n <= 1 || gamma == Ratio::ZERO {
        return 1;
    }
    let (a, b) = (gamma.num() as u32, gamma.den() as u32);
    let guess = libm::ceil(libm::pow(n as f64, gamma.to_f64())) as u64;
    // x^b >= n^a, checked near the float guess.
    let ge = |x: u64| -> bool {
        let mut lhs: u128 = 1;
        let mut rhs: u128 = 1;
        for _ in 0..b {
            lhs = lhs.saturating_mul(x as u128);
        }
        for _ in 0..a {
            rhs = rhs.saturating_mul(n as u128);
        }
        if lhs == u128::MAX || rhs == u128::MAX {
            return x >= guess;
        }
        lhs >= rhs
    };
    let mut x = guess.saturating_sub(2).max(1);
    while !ge(x) {
        x += 1;
    }
    x
}

impl SimConfig {
    pub fn new(n: u64, m: u64, gamma: Ratio) -> SimConfig {
        SimConfig { n, m, gamma, c_slack: 8, s_min: 96, extra_factor: 1, c_p: 128, min_machines: 0, strict_io: false, seed: 0 }
    }

    pub fn words_per_machine(&self) -> u64 {
        (ceil_pow(self.n, self.gamma) * self.c_slack).max(self.s_min)
    }

    pub fn machine_count(&self) -> u64 {
        let s = self.words_per_machine();
        (self.m.max(1) * self.c_p).div_ceil(s).max(self.min_machines).max(1) * self.extra_factor
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.gamma == Ratio::ZERO || self.gamma > Ratio::ONE {
            return Err(SimError::Config("gamma must lie in (0, 1]"));
        }
        if self.c_slack == 0 || self.c_p == 0 || self.extra_factor == 0 {
            return Err(SimError::Config("constants must be positive"));
        }
        let log_n = 64 - self.n.max(1).leading_zeros() as u64;
        if self.words_per_machine() < 2 * log_n.max(HEADER_WORDS) {
            return Err(SimError::Config("S below 2*max(log2 n, header)"));
        }
        if self.machine_count() > u32::MAX as u64 / 2 {
            return Err(SimError::Config("too many machines"));
        }
        Ok(())
    }
}

pub trait Store {
    /// Words currently held; must be cheap.
    fn words(&self) -> u64;
    /// Machines that are inactive with an empty inbox are not stepped.
    fn active(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub src: MachineId,
    pub payload: Vec<Word>,
}

impl Message {
    pub fn words(&self) -> u64 {
        self.payload.len() as u64 + HEADER_WORDS
    }
}

#[derive(Default, Debug)]
pub struct Outbox {
    msgs: Vec<(MachineId, Vec<Word>)>,
    words: u64,
}

impl Outbox {
    pub fn send(&mut self, dest: MachineId, payload: Vec<Word>) {
        self.words += payload.len() as u64 + HEADER_WORDS;
        self.msgs.push((dest, payload));
    }

    pub fn words(&self) -> u64 {
        self.words
    }

    pub fn is_empty(&self) -> bool {
        self.msgs.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MachineTranscript {
    pub words_in: u64,
    pub words_out: u64,
    pub mem_peak: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundTranscript {
    pub round: u64,
    pub label: String,
    /// Empty unless transcript recording is on.
    pub machines: Vec<MachineTranscript>,
    pub max_in: u64,
    pub max_out: u64,
    pub max_mem: u64,
    pub words_in: u64,
    pub words_out: u64,
    pub messages: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    pub rounds: u64,
    /// (label, rounds) in order of first use.
    pub phases: Vec<(String, u64)>,
    pub messages: u64,
    pub words: u64,
    pub max_mem: u64,
    pub max_io: u64,
    pub violations: u64,
}

impl Metrics {
    pub fn phase_rounds(&self, label: &str) -> u64 {
        self.phases.iter().filter(|p| p.0 == label).map(|p| p.1).sum()
    }

    pub fn absorb(&mut self, other: &Metrics) {
        self.rounds += other.rounds;
        self.messages += other.messages;
        self.words += other.words;
        self.max_mem = self.max_mem.max(other.max_mem);
        self.max_io = self.max_io.max(other.max_io);
        self.violations += other.violations;
        for (l, r) in &other.phases {
            self.add_phase(l, *r);
        }
    }

    pub fn add_phase(&mut self, label: &str, rounds: u64) {
        match self.phases.iter_mut().find(|p| p.0 == label) {
            Some(p) => p.1 += rounds,
            None => self.phases.push((label.into(), rounds)),
        }
    }
}

pub struct Sim<T> {
    cfg: SimConfig,
    s: u64,
    stores: Vec<T>,
    inbox: Vec<Vec<Message>>,
    inbox_words: Vec<u64>,
    metrics: Metrics,
    record: bool,
    transcripts: Vec<RoundTranscript>,
    /// Label of the latest round, reported by local-step violations.
    last_label: String,
}

impl<T: Store + Default> Sim<T> {
    pub fn new(cfg: SimConfig) -> Result<Sim<T>, SimError> {
        cfg.validate()?;
        let s = cfg.words_per_machine();
        let p = cfg.machine_count() as usize;
        Ok(Sim {
            cfg,
            s,
            stores: (0..p).map(|_| T::default()).collect(),
            inbox: (0..p).map(|_| Vec::new()).collect(),
            inbox_words: alloc::vec![0; p],
            metrics: Metrics::default(),
            record: false,
            transcripts: Vec::new(),
            last_label: String::new(),
        })
    }
}

impl<T: Store> Sim<T> {
    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Words per machine.
    pub fn s(&self) -> u64 {
        self.s
    }

    /// Machine count.
    pub fn p(&self) -> u64 {
        self.stores.len() as u64
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Count another simulator's work as if it had run here first.
    pub fn absorb_metrics(&mut self, other: &Metrics) {
        self.metrics.absorb(other);
    }

    pub fn record_transcripts(&mut self, on: bool) {
        self.record = on;
    }

    pub fn transcripts(&self) -> &[RoundTranscript] {
        &self.transcripts
    }

    pub fn store(&self, m: MachineId) -> &T {
        &self.stores[m as usize]
    }

    pub fn stores(&self) -> &[T] {
        &self.stores
    }

    /// Local, communication-free access (input loading, output collection).
    pub fn stores_mut(&mut self) -> &mut [T] {
        &mut self.stores
    }

    pub fn rounds(&self) -> u64 {
        self.metrics.rounds
    }

    pub fn pending_messages(&self) -> bool {
        self.inbox.iter().any(|b| !b.is_empty())
    }

    /// One synchronous round stepping every machine. Messages sent now are
    /// delivered next round, ordered by (source, sequence).
    pub fn run_round<F>(&mut self, label: &str, handler: F) -> Result<RoundTranscript, SimError>
    where
        F: FnMut(MachineId, &mut T, Vec<Message>, &mut Outbox),
    {
        self.round_impl(label, false, handler)
    }

    /// Like [`Sim::run_round`], but machines with an empty inbox whose store
    /// reports inactive are not stepped.
    pub fn run_round_sparse<F>(&mut self, label: &str, handler: F) -> Result<RoundTranscript, SimError>
    where
        F: FnMut(MachineId, &mut T, Vec<Message>, &mut Outbox),
    {
        self.round_impl(label, true, handler)
    }

    /// Consume delivered messages with local computation only; no round is
    /// charged and nothing can be sent.
    pub fn local_step<F>(&mut self, mut handler: F) -> Result<(), SimError>
    where
        F: FnMut(MachineId, &mut T, Vec<Message>),
    {
        let round = self.metrics.rounds + 1;
        for i in 0..self.stores.len() {
            let inbox = core::mem::take(&mut self.inbox[i]);
            self.inbox_words[i] = 0;
            handler(i as MachineId, &mut self.stores[i], inbox);
            let mem = self.stores[i].words();
            if mem > self.s {
                return Err(SimError::MemViolation { round, phase: alloc::format!("{} (local)", self.last_label), machine: i as MachineId, words: mem, limit: self.s });
            }
            self.metrics.max_mem = self.metrics.max_mem.max(mem);
        }
        Ok(())
    }

    /// Re-type every store locally. Pending messages are kept.
    pub fn map_stores<U: Store>(self, mut f: impl FnMut(MachineId, T) -> U) -> Sim<U> {
        let stores = self.stores.into_iter().enumerate().map(|(i, t)| f(i as MachineId, t)).collect();
        Sim {
            cfg: self.cfg,
            s: self.s,
            stores,
            inbox: self.inbox,
            inbox_words: self.inbox_words,
            metrics: self.metrics,
            record: self.record,
            transcripts: self.transcripts,
            last_label: self.last_label,
        }
    }

    fn round_impl<F>(&mut self, label: &str, sparse: bool, mut handler: F) -> Result<RoundTranscript, SimError>
    where
        F: FnMut(MachineId, &mut T, Vec<Message>, &mut Outbox),
    {
        let round = self.metrics.rounds + 1;
        self.last_label.clear();
        self.last_label.push_str(label);
        let p = self.stores.len();
        let s = self.s;
        let strict = self.cfg.strict_io;
        let mut next: Vec<Vec<Message>> = (0..p).map(|_| Vec::new()).collect();
        let mut next_words = alloc::vec![0u64; p];
        let mut tr = RoundTranscript {
            round,
            label: label.into(),
            machines: if self.record { alloc::vec![MachineTranscript::default(); p] } else { Vec::new() },
            max_in: 0,
            max_out: 0,
            max_mem: 0,
            words_in: 0,
            words_out: 0,
            messages: 0,
        };
        let mut out = Outbox::default();
        for i in 0..p {
            let inbox = core::mem::take(&mut self.inbox[i]);
            let w_in = core::mem::take(&mut self.inbox_words[i]);
            let store = &mut self.stores[i];
            if sparse && inbox.is_empty() && !store.active() {
                let mem = store.words();
                tr.max_mem = tr.max_mem.max(mem);
                if self.record {
                    tr.machines[i].mem_peak = mem;
                }
                continue;
            }
            out.msgs.clear();
            out.words = 0;
            handler(i as MachineId, store, inbox, &mut out);
            let w_out = out.words;
            let mem = store.words();
            if w_out > s || (strict && w_in + w_out > s) {
                return Err(SimError::IoViolation { round, phase: label.into(), machine: i as MachineId, dir: "sent", words: w_out, limit: s });
            }
            if mem > s {
                return Err(SimError::MemViolation { round, phase: label.into(), machine: i as MachineId, words: mem, limit: s });
            }
            tr.max_in = tr.max_in.max(w_in);
            tr.max_out = tr.max_out.max(w_out);
            tr.max_mem = tr.max_mem.max(mem);
            tr.words_in += w_in;
            tr.words_out += w_out;
            tr.messages += out.msgs.len() as u64;
            if self.record {
                tr.machines[i] = MachineTranscript { words_in: w_in, words_out: w_out, mem_peak: mem };
            }
            for (dest, payload) in out.msgs.drain(..) {
                let d = dest as usize;
                if d >= p {
                    return Err(SimError::BadDestination(dest));
                }
                next_words[d] += payload.len() as u64 + HEADER_WORDS;
                if next_words[d] > s {
                    return Err(SimError::IoViolation {
                        round: round + 1,
                        phase: label.into(),
                        machine: dest,
                        dir: "received",
                        words: next_words[d],
                        limit: s,
                    });
                }
                next[d].push(Message { src: i as MachineId, payload });
            }
        }
        self.inbox = next;
        self.inbox_words = next_words;
        self.metrics.rounds = round;
        self.metrics.add_phase(label, 1);
        self.metrics.messages += tr.messages;
        self.metrics.words += tr.words_out;
        self.metrics.max_mem = self.metrics.max_mem.max(tr.max_mem);
        self.metrics.max_io = self.metrics.max_io.max(tr.max_in).max(tr.max_out);
        let summary = RoundTranscript { machines: Vec::new(), ..tr.clone() };
        if self.record {
            self.transcripts.push(tr);
        }
        Ok(summary)
    }

    /// Place items in order, filling each machine up to `per_machine` words
    /// (`None` means S). Returns the item count per machine.
    pub fn scatter_input<I>(
        &mut self,
        items: impl IntoIterator<Item = I>,
        words: impl Fn(&I) -> u64,
        per_machine: Option<u64>,
        mut put: impl FnMut(&mut T, I),
    ) -> Result<Vec<u64>, SimError> {
        let cap = per_machine.unwrap_or(self.s).min(self.s);
        let p = self.stores.len();
        let mut counts = alloc::vec![0u64; p];
        let mut m = 0usize;
        let mut used = 0u64;
        let mut total = 0u64;
        for it in items {
            let w = words(&it);
            total += w;
            if used + w > cap {
                m += 1;
                used = 0;
            }
            if m >= p || w > cap {
                return Err(SimError::CapacityExceeded { words: total, capacity: cap * p as u64 });
            }
            used += w;
            counts[m] += 1;
            put(&mut self.stores[m], it);
        }
        Ok(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Default)]
    struct Cells(Vec<Word>);

    impl Store for Cells {
        fn words(&self) -> u64 {
            self.0.len() as u64
        }
    }

    fn cfg(n: u64, m: u64) -> SimConfig {
        let mut c = SimConfig::new(n, m, Ratio::ONE);
        c.c_p = 1;
        c.c_slack = 1;
        c
    }

    #[test]
    fn sizing_examples() {
        let c = cfg(100, 1000);
        assert_eq!((c.words_per_machine(), c.machine_count()), (100, 10));
        let mut c2 = c.clone();
        c2.extra_factor = 2;
        assert_eq!((c2.words_per_machine(), c2.machine_count()), (100, 20));
        let mut c3 = SimConfig::new(4, 10, Ratio::new(1, 2).unwrap());
        c3.c_slack = 1;
        c3.s_min = 40;
        assert_eq!(c3.words_per_machine(), 40);
        assert_eq!(ceil_pow(150, Ratio::new(1, 3).unwrap()), 6);
        assert_eq!(ceil_pow(125, Ratio::new(1, 3).unwrap()), 5);
        assert_eq!(ceil_pow(2048, Ratio::new(1, 2).unwrap()), 46);
    }

    #[test]
    fn silent_round_and_counter() {
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        assert_eq!(sim.metrics().rounds, 0);
        let t = sim.run_round("idle", |_, _, _, _| {}).unwrap();
        assert_eq!((t.words_in, t.words_out, t.messages), (0, 0, 0));
        assert_eq!(sim.metrics().rounds, 1);
        assert_eq!(sim.metrics().phase_rounds("idle"), 1);
    }

    #[test]
    fn oversend_is_fatal() {
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        let err = sim
            .run_round("x", |i, _, _, out| {
                if i == 3 {
                    out.send(4, alloc::vec![0; 99]);
                }
            })
            .unwrap_err();
        assert!(matches!(err, SimError::IoViolation { machine: 3, words: 101, .. }));
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        let err = sim
            .run_round("x", |i, _, _, out| {
                if i < 2 {
                    out.send(5, alloc::vec![0; 60]);
                }
            })
            .unwrap_err();
        assert!(matches!(err, SimError::IoViolation { machine: 5, dir: "received", .. }));
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        let err = sim.run_round("x", |i, st, _, _| if i == 0 { st.0 = alloc::vec![0; 101] }).unwrap_err();
        assert!(matches!(err, SimError::MemViolation { machine: 0, .. }));
    }

    #[test]
    fn echo_conserves_words() {
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        sim.record_transcripts(true);
        sim.run_round("seed", |i, _, _, out| out.send(i, alloc::vec![i as u64; 3])).unwrap();
        let t = sim
            .run_round("echo", |i, _, inbox, out| {
                for m in inbox {
                    out.send(i, m.payload);
                }
            })
            .unwrap();
        assert_eq!(t.words_in, t.words_out);
        for m in &sim.transcripts()[1].machines {
            assert_eq!(m.words_in, m.words_out);
        }
        assert_eq!(sim.transcripts()[0].words_out, sim.transcripts()[1].words_in);
    }

    #[test]
    fn scatter_fills_machines() {
        let mut c = cfg(3, 10);
        c.s_min = 5;
        let mut sim: Sim<Cells> = Sim::new(c).unwrap();
        assert_eq!(sim.p(), 2);
        assert_eq!(sim.s(), 5);
        let counts = sim.scatter_input(0..10u64, |_| 1, None, |st, x| st.0.push(x)).unwrap();
        assert_eq!(counts, [5, 5]);
        assert!(sim.scatter_input(0..1u64, |_| 1, None, |st, x| st.0.push(x)).is_ok());
        let mut sim: Sim<Cells> = Sim::new(cfg(100, 1000)).unwrap();
        let counts = sim.scatter_input(core::iter::empty::<u64>(), |_| 1, None, |_, _| {}).unwrap();
        assert!(counts.iter().all(|&c| c == 0));
        let counts = sim.scatter_input(0..100u64, |_| 3, None, |st, x| st.0.push(x)).unwrap();
        assert_eq!(counts.iter().filter(|&&c| c > 0).count(), (3 * 100usize).div_ceil(100) + 1);
    }
}
