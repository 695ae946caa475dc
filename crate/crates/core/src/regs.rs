//! Bus-visible registers of the audio interface and the FPGA-side top that
//! owns the I2C master, DAC serializer and ADC deserializer.
//!
//! Register map (word-aligned offsets from [`AUDIO_BASE`]):
//!
//! | offset | name       | access | contents                                        |
//! |--------|------------|--------|-------------------------------------------------|
//! | 0x00   | DAC_L      | rw     | left output sample, two's complement            |
//! | 0x04   | DAC_R      | rw     | right output sample                             |
//! | 0x08   | DAC_EN     | rw     | bit0 enables the DAC serializer                 |
//! | 0x0C   | ADC_L      | r      | left input sample, sign-extended                |
//! | 0x10   | ADC_R      | r      | right input sample                              |
//! | 0x14   | ADC_EN     | rw     | bit0 enables the ADC deserializer               |
//! | 0x18   | STATUS     | r      | bit0 dacBusy, bit1 adcBusy, bit2 dacLrcSeen,    |
//! |        |            |        | bit3 adcLrcSeen; reading clears bits 2 and 3    |
//! | 0x1C   | I2C_DATA   | w      | `{reg_addr[15:9], data[8:0]}`, starts a write   |
//! | 0x20   | I2C_STATUS | rw     | bit0 busy, bit1 sticky nack; any write clears   |
//! |        |            |        | the nack bit                                    |

use thiserror::Error;

use crate::i2c::{I2cCommand, I2cConfig, I2cMaster};
use crate::pins::{PinDrive, PinState};
use crate::serial::{AdcDeserializer, AudioWordConfig, DacSerializer, FrameTiming};

/// Base address of the interface in the processor's I/O space.
pub const AUDIO_BASE: u32 = 0xF00B_0000;

pub const DAC_L: u32 = 0x00;
pub const DAC_R: u32 = 0x04;
pub const DAC_EN: u32 = 0x08;
pub const ADC_L: u32 = 0x0C;
pub const ADC_R: u32 = 0x10;
pub const ADC_EN: u32 = 0x14;
pub const STATUS: u32 = 0x18;
pub const I2C_DATA: u32 = 0x1C;
pub const I2C_STATUS: u32 = 0x20;

pub const STATUS_DAC_BUSY: u32 = 1 << 0;
pub const STATUS_ADC_BUSY: u32 = 1 << 1;
pub const STATUS_DAC_LRC_SEEN: u32 = 1 << 2;
pub const STATUS_ADC_LRC_SEEN: u32 = 1 << 3;

pub const I2C_STATUS_BUSY: u32 = 1 << 0;
pub const I2C_STATUS_NACK: u32 = 1 << 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BusError {
    #[error("no register at offset {0:#04x}")]
    Unmapped(u32),
    #[error("register at offset {0:#04x} is read-only")]
    ReadOnly(u32),
    #[error("register at offset {0:#04x} is write-only")]
    WriteOnly(u32),
}

/// Audio data, enables and status flags shared between the bus and the
/// serial units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RegisterFile {
    pub dac_l: i32,
    pub dac_r: i32,
    pub dac_en: bool,
    pub adc_l: i32,
    pub adc_r: i32,
    pub adc_en: bool,
    pub dac_busy: bool,
    pub adc_busy: bool,
    pub dac_lrc_seen: bool,
    pub adc_lrc_seen: bool,
}

impl RegisterFile {
    /// STATUS value without the clear-on-read side effect.
    pub fn status(&self) -> u32 {
        let mut status = 0;
        if self.dac_busy {
            status |= STATUS_DAC_BUSY;
        }
        if self.adc_busy {
            status |= STATUS_ADC_BUSY;
        }
        if self.dac_lrc_seen {
            status |= STATUS_DAC_LRC_SEEN;
        }
        if self.adc_lrc_seen {
            status |= STATUS_ADC_LRC_SEEN;
        }
        status
    }
}

/// Accesses that touched audio data while the unit was mid-frame. Software
/// built on the runtime keeps both at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BusStats {
    pub dac_writes_while_busy: u64,
    pub adc_reads_while_busy: u64,
}

/// FPGA side of the pins: everything the processor talks to over the bus.
#[derive(Debug, Clone)]
pub struct AudioInterface {
    word: AudioWordConfig,
    lrc_period_ticks: u64,
    regs: RegisterFile,
    i2c: I2cMaster,
    dac: DacSerializer,
    adc: AdcDeserializer,
    stats: BusStats,
}

impl AudioInterface {
    pub fn new(word: AudioWordConfig, i2c: I2cConfig, lrc_period_ticks: u64) -> Self {
        Self {
            word,
            lrc_period_ticks,
            regs: RegisterFile::default(),
            i2c: I2cMaster::new(i2c),
            dac: DacSerializer::new(word),
            adc: AdcDeserializer::new(word),
            stats: BusStats::default(),
        }
    }

    pub fn registers(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn i2c(&self) -> &I2cMaster {
        &self.i2c
    }

    pub fn dac(&self) -> &DacSerializer {
        &self.dac
    }

    pub fn adc(&self) -> &AdcDeserializer {
        &self.adc
    }

    pub fn stats(&self) -> BusStats {
        self.stats
    }

    pub fn word(&self) -> AudioWordConfig {
        self.word
    }

    pub fn lrc_period_ticks(&self) -> u64 {
        self.lrc_period_ticks
    }

    /// Advance the I2C master, DAC and ADC by one tick, in that order.
    pub fn tick(&mut self, timing: &FrameTiming, pins: &PinState, drive: &mut PinDrive) {
        self.i2c.tick(pins, drive);
        self.dac.tick(timing, &mut self.regs, drive);
        self.adc.tick(timing, pins, &mut self.regs, drive);
    }

    pub fn bus_read(&mut self, offset: u32) -> Result<u32, BusError> {
        let bl = self.word.bit_length();
        Ok(match offset {
            DAC_L => bl.to_word(self.regs.dac_l),
            DAC_R => bl.to_word(self.regs.dac_r),
            DAC_EN => u32::from(self.regs.dac_en),
            ADC_L | ADC_R => {
                if self.regs.adc_busy {
                    self.stats.adc_reads_while_busy += 1;
                }
                let value = if offset == ADC_L {
                    self.regs.adc_l
                } else {
                    self.regs.adc_r
                };
                value as u32
            }
            ADC_EN => u32::from(self.regs.adc_en),
            STATUS => {
                let status = self.regs.status();
                self.regs.dac_lrc_seen = false;
                self.regs.adc_lrc_seen = false;
                status
            }
            I2C_DATA => return Err(BusError::WriteOnly(offset)),
            I2C_STATUS => {
                let mut status = 0;
                if self.i2c.busy() {
                    status |= I2C_STATUS_BUSY;
                }
                if self.i2c.nack() {
                    status |= I2C_STATUS_NACK;
                }
                status
            }
            _ => return Err(BusError::Unmapped(offset)),
        })
    }

    /// Audio words take the low `bit_length` bits of `value`, sign-extended.
    /// A write to I2C_DATA while the master is busy is dropped (the master
    /// counts it as a rejected submit).
    pub fn bus_write(&mut self, offset: u32, value: u32) -> Result<(), BusError> {
        let bl = self.word.bit_length();
        match offset {
            DAC_L | DAC_R => {
                if self.regs.dac_busy {
                    self.stats.dac_writes_while_busy += 1;
                }
                let sample = bl.from_word(value & bl.mask());
                if offset == DAC_L {
                    self.regs.dac_l = sample;
                } else {
                    self.regs.dac_r = sample;
                }
            }
            DAC_EN => self.regs.dac_en = value & 1 == 1,
            ADC_EN => self.regs.adc_en = value & 1 == 1,
            ADC_L | ADC_R | STATUS => return Err(BusError::ReadOnly(offset)),
            I2C_DATA => {
                self.i2c.submit(I2cCommand::unpack(value as u16));
            }
            I2C_STATUS => self.i2c.clear_nack(),
            _ => return Err(BusError::Unmapped(offset)),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::ClockConfig;
    use crate::serial::BitLength;

    fn iface(bl: BitLength) -> AudioInterface {
        let word = AudioWordConfig::new(bl, &ClockConfig::default()).unwrap();
        AudioInterface::new(word, I2cConfig::default(), 1536)
    }

    #[test]
    fn audio_words_sign_extend() {
        let mut hw = iface(BitLength::B16);
        hw.bus_write(DAC_L, 0xFFFF_8000).unwrap();
        assert_eq!(hw.registers().dac_l, -32768);
        hw.bus_write(DAC_R, 0x0000_FFFF).unwrap();
        assert_eq!(hw.registers().dac_r, -1);
        assert_eq!(hw.bus_read(DAC_R).unwrap(), 0xFFFF);
    }

    #[test]
    fn status_sticky_bits_clear_on_read() {
        let mut hw = iface(BitLength::B16);
        hw.regs.dac_lrc_seen = true;
        hw.regs.adc_busy = true;
        assert_eq!(hw.bus_read(STATUS).unwrap(), STATUS_DAC_LRC_SEEN | STATUS_ADC_BUSY);
        assert_eq!(hw.bus_read(STATUS).unwrap(), STATUS_ADC_BUSY);
    }

    #[test]
    fn access_errors() {
        let mut hw = iface(BitLength::B24);
        assert_eq!(hw.bus_write(ADC_L, 1), Err(BusError::ReadOnly(ADC_L)));
        assert_eq!(hw.bus_write(STATUS, 1), Err(BusError::ReadOnly(STATUS)));
        assert_eq!(hw.bus_read(I2C_DATA), Err(BusError::WriteOnly(I2C_DATA)));
        assert_eq!(hw.bus_read(0x24), Err(BusError::Unmapped(0x24)));
    }

    #[test]
    fn i2c_data_submits_and_busy_shows() {
        let mut hw = iface(BitLength::B16);
        assert_eq!(hw.bus_read(I2C_STATUS).unwrap(), 0);
        hw.bus_write(I2C_DATA, u32::from(I2cCommand::new(0x0C, 0).unwrap().pack()))
            .unwrap();
        assert_eq!(hw.bus_read(I2C_STATUS).unwrap(), I2C_STATUS_BUSY);
        hw.bus_write(I2C_DATA, 0x1234).unwrap();
        assert_eq!(hw.i2c().stats().rejected_submits, 1);
    }
}
