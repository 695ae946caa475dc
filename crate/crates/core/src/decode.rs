//! Wire-level decoders used by golden tests and the `decode-trace` command.

use std::fmt;

use crate::codec::I2cTransaction;
use crate::pins::Signal;
use crate::serial::{decode_lane, AudioLane, BitLength, FrameDecode};
use crate::trace::TraceBuffer;

/// Streaming I2C bus monitor over resolved SCLK/SDIN levels.
#[derive(Debug, Clone)]
pub struct I2cMonitor {
    last_sclk: bool,
    last_sdin: bool,
    open: Option<Open>,
    done: Vec<I2cTransaction>,
}

#[derive(Debug, Clone)]
struct Open {
    start_tick: u64,
    bits: Vec<bool>,
}

impl Open {
    fn finish(self, stop_tick: Option<u64>) -> I2cTransaction {
        let mut bytes = Vec::new();
        let mut acks = Vec::new();
        for chunk in self.bits.chunks(9) {
            if chunk.len() >= 8 {
                bytes.push(chunk[..8].iter().fold(0u8, |b, &bit| (b << 1) | u8::from(bit)));
            }
            if chunk.len() == 9 {
                acks.push(!chunk[8]);
            }
        }
        let complete = !self.bits.is_empty() && self.bits.len().is_multiple_of(9);
        let addr_byte = bytes.first().copied().unwrap_or(0);
        I2cTransaction {
            start_tick: self.start_tick,
            stop_tick,
            addr_byte,
            payload: bytes.into_iter().skip(1).collect(),
            acks,
            well_formed: complete && stop_tick.is_some(),
        }
    }
}

impl Default for I2cMonitor {
    fn default() -> Self {
        Self {
            last_sclk: true,
            last_sdin: true,
            open: None,
            done: Vec::new(),
        }
    }
}

impl I2cMonitor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feed the levels at `tick`; call on every change of either line.
    pub fn observe(&mut self, tick: u64, sclk: bool, sdin: bool) {
        let held_high = sclk && self.last_sclk;
        if held_high && self.last_sdin && !sdin {
            if let Some(prev) = self.open.take() {
                self.done.push(prev.finish(None));
            }
            self.open = Some(Open {
                start_tick: tick,
                bits: Vec::new(),
            });
        } else if held_high && !self.last_sdin && sdin {
            if let Some(mut open) = self.open.take() {
                // The rise that precedes a stop is not a data bit.
                if open.bits.len() % 9 == 1 {
                    open.bits.pop();
                }
                self.done.push(open.finish(Some(tick)));
            }
        } else if sclk && !self.last_sclk {
            if let Some(open) = self.open.as_mut() {
                open.bits.push(sdin);
            }
        }
        self.last_sclk = sclk;
        self.last_sdin = sdin;
    }

    /// Completed transactions, plus an unterminated one if the bus never
    /// saw its stop condition.
    pub fn finish(mut self) -> Vec<I2cTransaction> {
        if let Some(open) = self.open.take() {
            self.done.push(open.finish(None));
        }
        self.done
    }
}

pub fn decode_i2c(trace: &TraceBuffer) -> Vec<I2cTransaction> {
    let mut monitor = I2cMonitor::new();
    let mut prev = None;
    for (tick, pins) in trace.snapshots() {
        let levels = (pins.sclk, pins.sdin.level());
        if prev != Some(levels) {
            monitor.observe(tick, levels.0, levels.1);
            prev = Some(levels);
        }
    }
    monitor.finish()
}

/// Ticks where resolved SDIN changed while SCLK was high on both sides of
/// the change. On a clean bus these are exactly the start and stop
/// conditions.
pub fn sdin_changes_while_sclk_high(trace: &TraceBuffer) -> Vec<u64> {
    let mut out = Vec::new();
    let mut prev: Option<(bool, bool)> = None;
    for (tick, pins) in trace.snapshots() {
        let (sclk, sdin) = (pins.sclk, pins.sdin.level());
        if let Some((psclk, psdin)) = prev {
            if psclk && sclk && psdin != sdin {
                out.push(tick);
            }
        }
        prev = Some((sclk, sdin));
    }
    out
}

/// Count SCLK rising edges within `[from, to]`.
pub fn sclk_rising_edges(trace: &TraceBuffer, from: u64, to: u64) -> usize {
    trace
        .changes(Signal::Sclk)
        .iter()
        .filter(|&&(t, v)| t > 0 && (from..=to).contains(&t) && v.level())
        .count()
}

/// Everything recoverable from a trace.
#[derive(Debug, Clone)]
pub struct TraceReport {
    pub transactions: Vec<I2cTransaction>,
    pub dac: FrameDecode,
    pub adc: FrameDecode,
}

impl TraceReport {
    pub fn from_trace(trace: &TraceBuffer, bit_length: BitLength) -> Self {
        Self {
            transactions: decode_i2c(trace),
            dac: decode_lane(trace, AudioLane::Dac, bit_length),
            adc: decode_lane(trace, AudioLane::Adc, bit_length),
        }
    }

    pub fn malformed_transactions(&self) -> usize {
        self.transactions
            .iter()
            .filter(|t| !t.well_formed || !t.all_acked())
            .count()
    }

    /// No malformed transactions and no framing errors on either lane.
    pub fn is_clean(&self) -> bool {
        self.malformed_transactions() == 0 && self.dac.errors.is_empty() && self.adc.errors.is_empty()
    }
}

impl fmt::Display for TraceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.transactions {
            let payload: Vec<String> = t.payload.iter().map(|b| format!("{b:#04x}")).collect();
            let acks: String = t.acks.iter().map(|&a| if a { 'A' } else { 'N' }).collect();
            write!(
                f,
                "i2c  tick={:<10} addr={:#04x} payload=[{}] acks={}",
                t.start_tick,
                t.addr_byte,
                payload.join(", "),
                acks
            )?;
            if let Some(cmd) = t.command() {
                write!(f, " reg={:#04x} data={:#05x}", cmd.reg_addr(), cmd.data())?;
            }
            let status = if !t.well_formed {
                "MALFORMED"
            } else if !t.all_acked() {
                "NACK"
            } else {
                "ok"
            };
            writeln!(f, " {status}")?;
        }
        for (name, lane) in [("dac", &self.dac), ("adc", &self.adc)] {
            for frame in &lane.frames {
                writeln!(
                    f,
                    "{name}  tick={:<10} left={} right={}",
                    frame.lrc_tick, frame.sample.left, frame.sample.right
                )?;
            }
            for err in &lane.errors {
                writeln!(f, "{name}  error: {err}")?;
            }
        }
        writeln!(
            f,
            "summary: {} i2c transactions ({} malformed or nacked), {} dac frames, {} adc frames, {} framing errors",
            self.transactions.len(),
            self.malformed_transactions(),
            self.dac.frames.len(),
            self.adc.frames.len(),
            self.dac.errors.len() + self.adc.errors.len()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bit-bang one transaction at the monitor by hand.
    fn drive_bytes(m: &mut I2cMonitor, bytes: &[u8], ack: bool, stop: bool) {
        let mut t = 0;
        let mut step = |m: &mut I2cMonitor, sclk, sdin| {
            t += 1;
            m.observe(t, sclk, sdin);
        };
        step(m, true, true);
        step(m, true, false);
        step(m, false, false);
        for &b in bytes {
            for i in (0..8).rev() {
                let bit = (b >> i) & 1 == 1;
                step(m, false, bit);
                step(m, true, bit);
                step(m, false, bit);
            }
            step(m, false, !ack);
            step(m, true, !ack);
            step(m, false, !ack);
        }
        if stop {
            step(m, false, false);
            step(m, true, false);
            step(m, true, true);
        }
    }

    #[test]
    fn monitor_decodes_clean_transaction() {
        let mut m = I2cMonitor::new();
        drive_bytes(&mut m, &[0x34, 0x05, 0x79], true, true);
        let txs = m.finish();
        assert_eq!(txs.len(), 1);
        let t = &txs[0];
        assert_eq!(t.addr_byte, 0x34);
        assert_eq!(t.payload, vec![0x05, 0x79]);
        assert_eq!(t.acks, vec![true; 3]);
        assert!(t.well_formed, "{t:?}");
        let cmd = t.command().unwrap();
        assert_eq!((cmd.reg_addr(), cmd.data()), (0x02, 0x179));
    }

    #[test]
    fn monitor_flags_missing_stop_and_nacks() {
        let mut m = I2cMonitor::new();
        drive_bytes(&mut m, &[0x34, 0x00], false, false);
        let txs = m.finish();
        assert_eq!(txs.len(), 1);
        assert!(!txs[0].well_formed);
        assert_eq!(txs[0].acks, vec![false, false]);
    }
}
