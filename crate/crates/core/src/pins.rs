//! External pins between the FPGA and the codec.

use std::fmt;

/// Level of a pin that can be released (high impedance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Tri {
    Low,
    High,
    #[default]
    Z,
}

impl Tri {
    pub fn from_level(level: bool) -> Self {
        if level {
            Tri::High
        } else {
            Tri::Low
        }
    }

    /// Logic level as seen by a receiver. The I2C data line has a pull-up,
    /// so a released line reads 1.
    pub fn level(self) -> bool {
        !matches!(self, Tri::Low)
    }

    pub fn as_char(self) -> char {
        match self {
            Tri::Low => '0',
            Tri::High => '1',
            Tri::Z => 'z',
        }
    }
}

impl From<bool> for Tri {
    fn from(level: bool) -> Self {
        Tri::from_level(level)
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Resolved pin levels at the end of one system tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PinState {
    pub xclk: bool,
    pub bclk: bool,
    pub dac_lrc: bool,
    pub dac_dat: bool,
    pub adc_lrc: bool,
    pub adc_dat: bool,
    pub sclk: bool,
    pub sdin: Tri,
    pub sdin_we_master: bool,
    pub sdin_we_slave: bool,
}

impl PinState {
    pub fn get(&self, signal: Signal) -> Tri {
        match signal {
            Signal::Xclk => self.xclk.into(),
            Signal::Bclk => self.bclk.into(),
            Signal::DacLrc => self.dac_lrc.into(),
            Signal::DacDat => self.dac_dat.into(),
            Signal::AdcLrc => self.adc_lrc.into(),
            Signal::AdcDat => self.adc_dat.into(),
            Signal::Sclk => self.sclk.into(),
            Signal::Sdin => self.sdin,
            Signal::SdinWeMaster => self.sdin_we_master.into(),
            Signal::SdinWeSlave => self.sdin_we_slave.into(),
        }
    }

    /// Set one signal. Two-state pins take the receiver level of `value`.
    pub fn set(&mut self, signal: Signal, value: Tri) {
        let level = value.level();
        match signal {
            Signal::Xclk => self.xclk = level,
            Signal::Bclk => self.bclk = level,
            Signal::DacLrc => self.dac_lrc = level,
            Signal::DacDat => self.dac_dat = level,
            Signal::AdcLrc => self.adc_lrc = level,
            Signal::AdcDat => self.adc_dat = level,
            Signal::Sclk => self.sclk = level,
            Signal::Sdin => self.sdin = value,
            Signal::SdinWeMaster => self.sdin_we_master = level,
            Signal::SdinWeSlave => self.sdin_we_slave = level,
        }
    }
}

impl Default for PinState {
    fn default() -> Self {
        PinDrive::default()
            .resolve()
            .expect("reset drive has a single sdin driver")
    }
}

/// One wire per `PinState` field, in VCD declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Signal {
    Xclk,
    Bclk,
    DacLrc,
    DacDat,
    AdcLrc,
    AdcDat,
    Sclk,
    Sdin,
    SdinWeMaster,
    SdinWeSlave,
}

impl Signal {
    pub const ALL: [Signal; 10] = [
        Signal::Xclk,
        Signal::Bclk,
        Signal::DacLrc,
        Signal::DacDat,
        Signal::AdcLrc,
        Signal::AdcDat,
        Signal::Sclk,
        Signal::Sdin,
        Signal::SdinWeMaster,
        Signal::SdinWeSlave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Signal::Xclk => "xclk",
            Signal::Bclk => "bclk",
            Signal::DacLrc => "dac_lrc",
            Signal::DacDat => "dac_dat",
            Signal::AdcLrc => "adc_lrc",
            Signal::AdcDat => "adc_dat",
            Signal::Sclk => "sclk",
            Signal::Sdin => "sdin",
            Signal::SdinWeMaster => "sdin_we_master",
            Signal::SdinWeSlave => "sdin_we_slave",
        }
    }

    pub fn from_name(name: &str) -> Option<Signal> {
        Signal::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Registered outputs of every device. Each device only touches the fields
/// it owns; the simulator resolves them into a `PinState` after each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PinDrive {
    pub xclk: bool,
    pub bclk: bool,
    pub dac_lrc: bool,
    pub dac_dat: bool,
    pub adc_lrc: bool,
    pub adc_dat: bool,
    pub sclk: bool,
    /// `Some(level)` while the FPGA drives SDIN.
    pub sdin_master: Option<bool>,
    /// `Some(level)` while the codec drives SDIN.
    pub sdin_slave: Option<bool>,
}

impl Default for PinDrive {
    /// Audio outputs reset low; the I2C lines idle high (SCLK driven high,
    /// SDIN released onto its pull-up).
    fn default() -> Self {
        Self {
            xclk: false,
            bclk: false,
            dac_lrc: false,
            dac_dat: false,
            adc_lrc: false,
            adc_dat: false,
            sclk: true,
            sdin_master: None,
            sdin_slave: None,
        }
    }
}

/// Both sides drove SDIN in the same tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contention;

impl PinDrive {
    pub fn resolve(&self) -> Result<PinState, Contention> {
        let sdin = match (self.sdin_master, self.sdin_slave) {
            (Some(_), Some(_)) => return Err(Contention),
            (Some(level), None) | (None, Some(level)) => Tri::from_level(level),
            (None, None) => Tri::Z,
        };
        Ok(PinState {
            xclk: self.xclk,
            bclk: self.bclk,
            dac_lrc: self.dac_lrc,
            dac_dat: self.dac_dat,
            adc_lrc: self.adc_lrc,
            adc_dat: self.adc_dat,
            sclk: self.sclk,
            sdin,
            sdin_we_master: self.sdin_master.is_some(),
            sdin_we_slave: self.sdin_slave.is_some(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn released_sdin_reads_high() {
        let pins = PinDrive::default().resolve().unwrap();
        assert_eq!(pins.sdin, Tri::Z);
        assert!(pins.sdin.level());
        assert!(pins.sclk);
        assert!(!pins.sdin_we_master && !pins.sdin_we_slave);
    }

    #[test]
    fn single_driver_wins() {
        let mut drive = PinDrive {
            sdin_slave: Some(false),
            ..PinDrive::default()
        };
        let pins = drive.resolve().unwrap();
        assert_eq!(pins.sdin, Tri::Low);
        assert!(pins.sdin_we_slave);

        drive.sdin_slave = None;
        drive.sdin_master = Some(true);
        assert_eq!(drive.resolve().unwrap().sdin, Tri::High);
    }

    #[test]
    fn two_drivers_contend() {
        let drive = PinDrive {
            sdin_master: Some(false),
            sdin_slave: Some(false),
            ..PinDrive::default()
        };
        assert_eq!(drive.resolve(), Err(Contention));
    }

    #[test]
    fn get_set_round_trip() {
        let mut pins = PinState::default();
        for signal in Signal::ALL {
            let value = if signal == Signal::Sdin { Tri::Low } else { Tri::High };
            pins.set(signal, value);
            assert_eq!(pins.get(signal), value);
            assert_eq!(Signal::from_name(signal.name()), Some(signal));
        }
    }
}
