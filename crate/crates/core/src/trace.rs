//! Run-length encoded record of every pin change.

use crate::pins::{PinState, Signal, Tri};

/// Per-signal list of `(tick, value)` changes. The first entry of every
/// signal is at tick 0 and timestamps are strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceBuffer {
    changes: [Vec<(u64, Tri)>; 10],
    last: Option<PinState>,
    end_tick: u64,
}

impl TraceBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record the resolved state at the end of `tick`. Ticks must be
    /// recorded in order, starting at 0.
    pub fn record(&mut self, tick: u64, pins: &PinState) {
        match self.last {
            None => {
                debug_assert_eq!(tick, 0);
                for signal in Signal::ALL {
                    self.changes[signal.index()].push((tick, pins.get(signal)));
                }
            }
            Some(prev) if prev != *pins => {
                for signal in Signal::ALL {
                    let value = pins.get(signal);
                    if prev.get(signal) != value {
                        self.changes[signal.index()].push((tick, value));
                    }
                }
            }
            Some(_) => {}
        }
        self.last = Some(*pins);
        self.end_tick = tick;
    }

    /// Append a change directly. Used when loading a trace from a file.
    pub(crate) fn push_change(&mut self, signal: Signal, tick: u64, value: Tri) {
        let list = &mut self.changes[signal.index()];
        match list.last_mut() {
            Some((t, v)) if *t == tick => *v = value,
            Some((_, v)) if *v == value => {}
            _ => list.push((tick, value)),
        }
        self.end_tick = self.end_tick.max(tick);
    }

    pub(crate) fn set_end_tick(&mut self, tick: u64) {
        self.end_tick = self.end_tick.max(tick);
    }

    pub fn changes(&self, signal: Signal) -> &[(u64, Tri)] {
        &self.changes[signal.index()]
    }

    /// Mutable access for tests that tamper with a recorded trace.
    pub fn changes_mut(&mut self, signal: Signal) -> &mut Vec<(u64, Tri)> {
        &mut self.changes[signal.index()]
    }

    /// Last tick covered by the trace.
    pub fn end_tick(&self) -> u64 {
        self.end_tick
    }

    pub fn is_empty(&self) -> bool {
        self.changes.iter().all(Vec::is_empty)
    }

    /// Value of `signal` at the end of `tick`.
    pub fn value_at(&self, signal: Signal, tick: u64) -> Option<Tri> {
        let list = self.changes(signal);
        let idx = list.partition_point(|&(t, _)| t <= tick);
        idx.checked_sub(1).map(|i| list[i].1)
    }

    /// Full pin state at every tick where at least one signal changed, in
    /// tick order.
    pub fn snapshots(&self) -> Snapshots<'_> {
        Snapshots {
            trace: self,
            cursor: [0; 10],
            state: PinState::default(),
        }
    }

    /// Interleaved `(tick, signal, value)` changes in tick order, signals in
    /// declaration order within a tick.
    pub fn events(&self) -> impl Iterator<Item = (u64, Signal, Tri)> + '_ {
        let mut cursor = [0usize; 10];
        std::iter::from_fn(move || {
            let (signal, &(tick, value)) = Signal::ALL
                .iter()
                .filter_map(|&s| self.changes(s).get(cursor[s.index()]).map(|c| (s, c)))
                .min_by_key(|(s, (tick, _))| (*tick, *s))?;
            cursor[signal.index()] += 1;
            Some((tick, signal, value))
        })
    }
}

pub struct Snapshots<'a> {
    trace: &'a TraceBuffer,
    cursor: [usize; 10],
    state: PinState,
}

impl Iterator for Snapshots<'_> {
    type Item = (u64, PinState);

    fn next(&mut self) -> Option<Self::Item> {
        let tick = Signal::ALL
            .iter()
            .filter_map(|&s| self.trace.changes(s).get(self.cursor[s.index()]))
            .map(|&(t, _)| t)
            .min()?;
        for signal in Signal::ALL {
            let list = self.trace.changes(signal);
            let i = &mut self.cursor[signal.index()];
            if let Some(&(t, value)) = list.get(*i) {
                if t == tick {
                    self.state.set(signal, value);
                    *i += 1;
                }
            }
        }
        Some((tick, self.state))
    }
}
