//! VCD export and import of a [`TraceBuffer`].
//!
//! One scalar wire per pin under a `wm8731_if` module. Times are written at
//! a 100 ps timescale with 125 units per system tick, which keeps the file
//! within the 1/10/100 multipliers the format allows while representing the
//! 12.5 ns tick exactly.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;
use vcd::{IdCode, SimulationCommand, TimescaleUnit, Value};

use crate::pins::{Signal, Tri};
use crate::trace::TraceBuffer;

pub const SCOPE: &str = "wm8731_if";

/// VCD time units per system tick at the 100 ps timescale.
pub const UNITS_PER_TICK: u64 = 125;

#[derive(Debug, Error)]
pub enum VcdError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed VCD: {0}")]
    Format(String),
}

fn to_value(v: Tri) -> Value {
    match v {
        Tri::Low => Value::V0,
        Tri::High => Value::V1,
        Tri::Z => Value::Z,
    }
}

pub fn write_vcd<W: Write>(trace: &TraceBuffer, out: W) -> io::Result<()> {
    let mut w = vcd::Writer::new(out);
    w.timescale(100, TimescaleUnit::PS)?;
    w.add_module(SCOPE)?;
    let mut ids = Vec::with_capacity(Signal::ALL.len());
    for signal in Signal::ALL {
        ids.push(w.add_wire(1, signal.name())?);
    }
    w.upscope()?;
    w.enddefinitions()?;

    let mut events = trace.events().peekable();
    let mut current = None;
    let mut in_dumpvars = false;
    while let Some((tick, signal, value)) = events.next() {
        if current != Some(tick) {
            if in_dumpvars {
                w.end()?;
                in_dumpvars = false;
            }
            w.timestamp(tick * UNITS_PER_TICK)?;
            if tick == 0 {
                w.begin(SimulationCommand::Dumpvars)?;
                in_dumpvars = true;
            }
            current = Some(tick);
        }
        w.change_scalar(ids[signal.index()], to_value(value))?;
        if in_dumpvars && events.peek().is_none_or(|&(t, _, _)| t != 0) {
            w.end()?;
            in_dumpvars = false;
        }
    }
    if trace.end_tick() > current.unwrap_or(0) {
        w.timestamp(trace.end_tick() * UNITS_PER_TICK)?;
    }
    w.flush()
}

pub fn save_vcd(trace: &TraceBuffer, path: &Path) -> Result<(), VcdError> {
    let io_err = |source| VcdError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    write_vcd(trace, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Parse a VCD written by [`write_vcd`]. Unknown wires are ignored; every
/// pin wire must be present.
pub fn read_vcd<R: BufRead>(input: R) -> Result<TraceBuffer, VcdError> {
    let mut parser = vcd::Parser::new(input);
    let header = parser.parse_header().map_err(|e| VcdError::Format(e.to_string()))?;
    let units_per_tick = match header.timescale {
        Some((100, TimescaleUnit::PS)) | None => UNITS_PER_TICK,
        Some((n, unit)) => {
            return Err(VcdError::Format(format!(
                "unsupported timescale {n} {unit}, expected 100 ps"
            )))
        }
    };

    let mut ids: Vec<(IdCode, Signal)> = Vec::new();
    for signal in Signal::ALL {
        let var = header
            .find_var(&[SCOPE, signal.name()])
            .ok_or_else(|| VcdError::Format(format!("missing wire {SCOPE}.{}", signal.name())))?;
        ids.push((var.code, signal));
    }

    let mut trace = TraceBuffer::new();
    let mut now = 0u64;
    for command in parser {
        let command = command.map_err(|e| VcdError::Format(e.to_string()))?;
        match command {
            vcd::Command::Timestamp(t) => {
                if t % units_per_tick != 0 {
                    return Err(VcdError::Format(format!("timestamp {t} is not a whole system tick")));
                }
                now = t / units_per_tick;
                trace.set_end_tick(now);
            }
            vcd::Command::ChangeScalar(id, value) => {
                if let Some(&(_, signal)) = ids.iter().find(|(code, _)| *code == id) {
                    let v = match value {
                        Value::V0 => Tri::Low,
                        Value::V1 => Tri::High,
                        Value::Z => Tri::Z,
                        Value::X => return Err(VcdError::Format(format!("{} is x at tick {now}", signal.name()))),
                    };
                    trace.push_change(signal, now, v);
                }
            }
            _ => {}
        }
    }
    for signal in Signal::ALL {
        if trace.changes(signal).first().map(|&(t, _)| t) != Some(0) {
            return Err(VcdError::Format(format!(
                "{} has no initial value at time 0",
                signal.name()
            )));
        }
    }
    Ok(trace)
}

pub fn load_vcd(path: &Path) -> Result<TraceBuffer, VcdError> {
    let file = File::open(path).map_err(|source| VcdError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_vcd(BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pins::PinState;

    #[test]
    fn round_trip_small_trace() {
        let mut trace = TraceBuffer::new();
        let mut pins = PinState::default();
        trace.record(0, &pins);
        pins.bclk = true;
        pins.sdin = Tri::Low;
        trace.record(3, &pins);
        pins.sdin = Tri::Z;
        trace.record(4, &pins);
        trace.record(9, &pins);

        let mut buf = Vec::new();
        write_vcd(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("$timescale 100 ps $end"));
        assert!(text.contains("$dumpvars"));
        assert!(text.contains("#375"));
        assert!(text.contains("z"));

        let back = read_vcd(&buf[..]).unwrap();
        for signal in Signal::ALL {
            assert_eq!(back.changes(signal), trace.changes(signal), "{}", signal.name());
        }
        assert_eq!(back.end_tick(), 9);
    }

    #[test]
    fn rejects_missing_wire() {
        let text = b"$timescale 100 ps $end\n$scope module wm8731_if $end\n$var wire 1 ! bclk $end\n$upscope $end\n$enddefinitions $end\n#0\n0!\n";
        assert!(matches!(read_vcd(&text[..]), Err(VcdError::Format(_))));
    }
}
