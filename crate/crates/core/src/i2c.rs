//! Write-only I2C master for the codec control port.
//!
//! A transaction is a start condition, the address byte, two payload bytes
//! and a stop condition. Every byte is followed by an ack clock during which
//! the master releases SDIN so the codec can pull it low.
//!
//! Timing is scheduled in quarter SCLK periods, counted from a tick where
//! the free-running SCLK divider wraps:
//!
//! ```text
//! q0        start: SCLK high, SDIN driven high
//! q1        SDIN falls (start condition, mid SCLK-high)
//! q2+4k     SCLK falls, clock cell k begins (k = 0..27)
//! q3+4k     SDIN takes bit k, or is released for an ack cell
//! q4+4k     SCLK rises (codec samples)
//! q5+4k     master samples the ack level in ack cells
//! q110      SCLK falls after the last ack
//! q111      SDIN driven low
//! q112      SCLK rises
//! q113      SDIN rises (stop condition)
//! q114      SDIN released, idle
//! ```
//!
//! SCLK only toggles during a transaction and idles high.

use crate::clock::SYSTEM_CLOCK_HZ;
use crate::error::ConfigError;
use crate::pins::{PinDrive, PinState};

/// 7-bit codec address on the control bus.
pub const SLAVE_ADDRESS: u8 = 0b001_1010;

pub const MAX_SCLK_HZ: u32 = 526_000;
pub const DEFAULT_SCLK_HZ: u32 = 200_000;

/// Bytes per transaction (address + two payload bytes).
pub const TRANSACTION_BYTES: usize = 3;

/// Data and ack clocks per transaction.
pub const CLOCKS_PER_TRANSACTION: u32 = 9 * TRANSACTION_BYTES as u32;

const STOP_QUARTER: u32 = 2 + 4 * CLOCKS_PER_TRANSACTION;
const IDLE_QUARTER: u32 = STOP_QUARTER + 4;

/// Address byte: the codec address followed by the write bit (always 0).
pub const fn address_byte() -> u8 {
    SLAVE_ADDRESS << 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct I2cConfig {
    sclk_freq_hz: u32,
    sclk_divider: u32,
}

impl I2cConfig {
    pub fn new(sclk_freq_hz: u32) -> Result<Self, ConfigError> {
        const FIELD: &str = "i2c.sclk_hz";
        if sclk_freq_hz == 0 {
            return Err(ConfigError::new(FIELD, "must be positive"));
        }
        if sclk_freq_hz > MAX_SCLK_HZ {
            return Err(ConfigError::new(
                FIELD,
                format!("{sclk_freq_hz} Hz exceeds the codec maximum of {MAX_SCLK_HZ} Hz"),
            ));
        }
        if !SYSTEM_CLOCK_HZ.is_multiple_of(sclk_freq_hz) {
            return Err(ConfigError::new(
                FIELD,
                format!("{SYSTEM_CLOCK_HZ} Hz is not an integer multiple of {sclk_freq_hz} Hz"),
            ));
        }
        let sclk_divider = SYSTEM_CLOCK_HZ / sclk_freq_hz;
        if !sclk_divider.is_multiple_of(4) {
            return Err(ConfigError::new(
                FIELD,
                format!("SCLK period of {sclk_divider} ticks is not a multiple of 4"),
            ));
        }
        Ok(Self {
            sclk_freq_hz,
            sclk_divider,
        })
    }

    pub fn sclk_freq_hz(&self) -> u32 {
        self.sclk_freq_hz
    }

    /// System ticks per SCLK period.
    pub fn sclk_divider(&self) -> u32 {
        self.sclk_divider
    }

    pub fn quarter_ticks(&self) -> u32 {
        self.sclk_divider / 4
    }

    /// System ticks from the first start-condition tick to the idle tick.
    pub fn transaction_ticks(&self) -> u64 {
        u64::from(IDLE_QUARTER) * u64::from(self.quarter_ticks())
    }
}

impl Default for I2cConfig {
    fn default() -> Self {
        Self::new(DEFAULT_SCLK_HZ).expect("default SCLK is valid")
    }
}

/// One codec register write: a 7-bit register address and 9-bit value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct I2cCommand {
    reg_addr: u8,
    data: u16,
}

impl I2cCommand {
    pub fn new(reg_addr: u8, data: u16) -> Result<Self, ConfigError> {
        if reg_addr >= 0x80 {
            return Err(ConfigError::new(
                "i2c.reg_addr",
                format!("{reg_addr:#x} does not fit in 7 bits"),
            ));
        }
        if data >= 0x200 {
            return Err(ConfigError::new(
                "i2c.data",
                format!("{data:#x} does not fit in 9 bits"),
            ));
        }
        Ok(Self { reg_addr, data })
    }

    pub fn reg_addr(&self) -> u8 {
        self.reg_addr
    }

    pub fn data(&self) -> u16 {
        self.data
    }

    /// The two payload bytes: register address with data bit 8, then data
    /// bits 7..0.
    pub fn encode(&self) -> [u8; 2] {
        [(self.reg_addr << 1) | (self.data >> 8) as u8, (self.data & 0xFF) as u8]
    }

    pub fn decode(bytes: [u8; 2]) -> Self {
        Self {
            reg_addr: bytes[0] >> 1,
            data: (u16::from(bytes[0] & 1) << 8) | u16::from(bytes[1]),
        }
    }

    /// Packed `{reg_addr, data}` form written to the I2C_DATA register.
    pub fn pack(&self) -> u16 {
        u16::from_be_bytes(self.encode())
    }

    pub fn unpack(word: u16) -> Self {
        Self::decode(word.to_be_bytes())
    }
}

/// Convenience for the module-level operation name.
pub fn encode_command(cmd: &I2cCommand) -> (u8, u8) {
    let [hi, lo] = cmd.encode();
    (hi, lo)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum I2cState {
    Idle,
    Start,
    AddrByte,
    AckAddr,
    DataByte1,
    AckData1,
    DataByte2,
    AckData2,
    Stop,
}

impl I2cState {
    pub fn is_ack(self) -> bool {
        matches!(self, I2cState::AckAddr | I2cState::AckData1 | I2cState::AckData2)
    }

    fn for_cell(cell: u32) -> Self {
        match (cell / 9, cell % 9 == 8) {
            (0, false) => I2cState::AddrByte,
            (0, true) => I2cState::AckAddr,
            (1, false) => I2cState::DataByte1,
            (1, true) => I2cState::AckData1,
            (_, false) => I2cState::DataByte2,
            (_, true) => I2cState::AckData2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct I2cStats {
    pub transactions: u64,
    /// Transactions in which at least one ack was missing.
    pub nacked_transactions: u64,
    pub rejected_submits: u64,
}

#[derive(Debug, Clone)]
pub struct I2cMaster {
    config: I2cConfig,
    divider_count: u32,
    quarter_count: u32,
    quarter: u32,
    state: I2cState,
    bit_index: u8,
    shift_register: u8,
    bytes: [u8; TRANSACTION_BYTES],
    acks: [bool; TRANSACTION_BYTES],
    pending: Option<I2cCommand>,
    nack: bool,
    sclk: bool,
    sdin: Option<bool>,
    stats: I2cStats,
}

impl I2cMaster {
    pub fn new(config: I2cConfig) -> Self {
        Self {
            config,
            divider_count: 0,
            quarter_count: 0,
            quarter: 0,
            state: I2cState::Idle,
            bit_index: 0,
            shift_register: 0,
            bytes: [0; TRANSACTION_BYTES],
            acks: [false; TRANSACTION_BYTES],
            pending: None,
            nack: false,
            sclk: true,
            sdin: None,
            stats: I2cStats::default(),
        }
    }

    pub fn config(&self) -> &I2cConfig {
        &self.config
    }

    pub fn state(&self) -> I2cState {
        self.state
    }

    /// Bit being shifted in a byte state (7 = MSB).
    pub fn bit_index(&self) -> Option<u8> {
        matches!(
            self.state,
            I2cState::AddrByte | I2cState::DataByte1 | I2cState::DataByte2
        )
        .then_some(self.bit_index)
    }

    pub fn shift_register(&self) -> u8 {
        self.shift_register
    }

    pub fn busy(&self) -> bool {
        self.pending.is_some() || self.state != I2cState::Idle
    }

    /// Sticky: set when any ack window read high, cleared by software.
    pub fn nack(&self) -> bool {
        self.nack
    }

    pub fn clear_nack(&mut self) {
        self.nack = false;
    }

    pub fn stats(&self) -> I2cStats {
        self.stats
    }

    /// Queue a write. Rejected without side effects while a transaction is
    /// pending or running; software must poll `busy` first.
    pub fn submit(&mut self, cmd: I2cCommand) -> bool {
        if self.busy() {
            self.stats.rejected_submits += 1;
            return false;
        }
        self.pending = Some(cmd);
        true
    }

    pub fn tick(&mut self, pins: &PinState, drive: &mut PinDrive) {
        let at_boundary = self.divider_count == 0;
        self.divider_count += 1;
        if self.divider_count == self.config.sclk_divider {
            self.divider_count = 0;
        }

        if self.state == I2cState::Idle {
            if at_boundary {
                if let Some(cmd) = self.pending.take() {
                    let [b1, b2] = cmd.encode();
                    self.bytes = [address_byte(), b1, b2];
                    self.acks = [false; TRANSACTION_BYTES];
                    self.quarter = 0;
                    self.quarter_count = 0;
                    self.on_quarter(pins);
                }
            }
        } else {
            self.quarter_count += 1;
            if self.quarter_count == self.config.quarter_ticks() {
                self.quarter_count = 0;
                self.quarter += 1;
                self.on_quarter(pins);
            }
        }

        drive.sclk = self.sclk;
        drive.sdin_master = self.sdin;
    }

    fn on_quarter(&mut self, pins: &PinState) {
        let q = self.quarter;
        match q {
            0 => {
                self.state = I2cState::Start;
                self.sclk = true;
                self.sdin = Some(true);
            }
            1 => self.sdin = Some(false),
            2..STOP_QUARTER => {
                let cell = (q - 2) / 4;
                match (q - 2) % 4 {
                    0 => self.sclk = false,
                    1 => {
                        self.state = I2cState::for_cell(cell);
                        if self.state.is_ack() {
                            self.sdin = None;
                        } else {
                            let bit = 7 - (cell % 9) as u8;
                            if bit == 7 {
                                self.shift_register = self.bytes[(cell / 9) as usize];
                            }
                            self.bit_index = bit;
                            self.sdin = Some((self.shift_register >> bit) & 1 == 1);
                        }
                    }
                    2 => self.sclk = true,
                    _ => {
                        if self.state.is_ack() {
                            self.acks[(cell / 9) as usize] = !pins.sdin.level();
                        }
                    }
                }
            }
            STOP_QUARTER => self.sclk = false,
            q if q == STOP_QUARTER + 1 => {
                self.state = I2cState::Stop;
                self.sdin = Some(false);
            }
            q if q == STOP_QUARTER + 2 => self.sclk = true,
            q if q == STOP_QUARTER + 3 => self.sdin = Some(true),
            _ => {
                self.sdin = None;
                self.state = I2cState::Idle;
                self.stats.transactions += 1;
                if self.acks.contains(&false) {
                    self.nack = true;
                    self.stats.nacked_transactions += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn address_byte_is_codec_address_with_write_bit() {
        assert_eq!(address_byte(), 0x34);
        assert_eq!(address_byte() >> 1, 0x1A);
        assert_eq!(address_byte() & 1, 0);
    }

    #[test]
    fn encode_examples() {
        let all_zero = I2cCommand::new(0x00, 0x000).unwrap();
        assert_eq!(encode_command(&all_zero), (0x00, 0x00));
        // (0x0C << 1) | 0 = 0x18
        assert_eq!(encode_command(&I2cCommand::new(0x0C, 0x000).unwrap()), (0x18, 0x00));
        // (0x02 << 1) | 1 = 0x05, 0x179 & 0xFF = 0x79
        assert_eq!(encode_command(&I2cCommand::new(0x02, 0x179).unwrap()), (0x05, 0x79));
    }

    #[test]
    fn encode_decode_exhaustive() {
        for reg in 0..128u8 {
            for data in 0..512u16 {
                let cmd = I2cCommand::new(reg, data).unwrap();
                let (hi, lo) = encode_command(&cmd);
                // Independent bit-concatenation oracle.
                let joined = (u16::from(hi) << 8) | u16::from(lo);
                assert_eq!(joined, (u16::from(reg) << 9) | data);
                assert_eq!(I2cCommand::decode([hi, lo]), cmd);
                assert_eq!(I2cCommand::unpack(cmd.pack()), cmd);
            }
        }
    }

    #[test]
    fn command_range_checked() {
        assert!(I2cCommand::new(0x80, 0).is_err());
        assert!(I2cCommand::new(0, 0x200).is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = I2cConfig::default();
        assert_eq!(cfg.sclk_divider(), 400);
        assert_eq!(cfg.quarter_ticks(), 100);
        assert_eq!(cfg.transaction_ticks(), 11_400);
        assert!(I2cConfig::new(500_000).is_ok());
        assert!(I2cConfig::new(526_000).is_err());
        assert!(I2cConfig::new(800_000).is_err());
        assert!(I2cConfig::new(0).is_err());
        // 80 MHz / 300 kHz is not an integer.
        assert!(I2cConfig::new(300_000).is_err());
        // 80 MHz / 320 kHz = 250 ticks, not a multiple of 4.
        assert!(I2cConfig::new(320_000).is_err());
    }

    #[test]
    fn submit_while_busy_is_rejected() {
        let mut master = I2cMaster::new(I2cConfig::default());
        let cmd = I2cCommand::new(0x0C, 0).unwrap();
        assert!(master.submit(cmd));
        assert!(master.busy());
        assert!(!master.submit(I2cCommand::new(0x01, 1).unwrap()));
        assert_eq!(master.stats().rejected_submits, 1);
        // The first command is still the one that runs.
        let mut drive = PinDrive::default();
        let pins = PinState::default();
        master.tick(&pins, &mut drive);
        assert_eq!(master.bytes, [0x34, 0x18, 0x00]);
    }

    #[test]
    fn master_released_only_in_ack_and_idle() {
        let cfg = I2cConfig::default();
        let mut master = I2cMaster::new(cfg);
        let pins = PinState::default();
        let mut drive = PinDrive::default();
        master.submit(I2cCommand::new(0x02, 0x179).unwrap());
        let mut ack_ticks = 0;
        for _ in 0..cfg.transaction_ticks() + 10 {
            master.tick(&pins, &mut drive);
            let released = drive.sdin_master.is_none();
            let st = master.state();
            assert_eq!(released, st.is_ack() || st == I2cState::Idle, "{st:?}");
            if st.is_ack() {
                ack_ticks += 1;
            }
        }
        assert_eq!(ack_ticks, 3 * cfg.sclk_divider());
        assert!(!master.busy());
        // Nobody pulled the line low.
        assert!(master.nack());
        assert_eq!(master.stats().nacked_transactions, 1);
    }
}
