//! C ABI over the simulator runtime.
//!
//! Every function returns a [`WmStatus`] (or a plain value for infallible
//! queries) and never unwinds across the boundary. A handle is created with
//! [`wm_sim_new`] and released with [`wm_sim_free`]; handles are not
//! thread-safe. After a failing call, [`wm_sim_last_error`] describes it.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wm8731_sim::runtime::{DelayParams, RuntimeError};
use wm8731_sim::{
    derive_rates, BitLength, ClockConfig, I2cCommand, Runtime, SampleStream, SimConfig, SimError, StereoSample,
    VolumeDb,
};

/// Register offsets from [`WM_AUDIO_BASE`].
pub const WM_REG_DAC_L: u32 = 0x00;
pub const WM_REG_DAC_R: u32 = 0x04;
pub const WM_REG_DAC_EN: u32 = 0x08;
pub const WM_REG_ADC_L: u32 = 0x0C;
pub const WM_REG_ADC_R: u32 = 0x10;
pub const WM_REG_ADC_EN: u32 = 0x14;
pub const WM_REG_STATUS: u32 = 0x18;
pub const WM_REG_I2C_DATA: u32 = 0x1C;
pub const WM_REG_I2C_STATUS: u32 = 0x20;
pub const WM_AUDIO_BASE: u32 = 0xF00B_0000;

pub const WM_STATUS_DAC_BUSY: u32 = 1 << 0;
pub const WM_STATUS_ADC_BUSY: u32 = 1 << 1;
pub const WM_STATUS_DAC_LRC_SEEN: u32 = 1 << 2;
pub const WM_STATUS_ADC_LRC_SEEN: u32 = 1 << 3;
pub const WM_I2C_STATUS_BUSY: u32 = 1 << 0;
pub const WM_I2C_STATUS_NACK: u32 = 1 << 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidArgument = 3,
    Contention = 4,
    Timeout = 5,
    Busy = 6,
    Decode = 7,
    Nack = 8,
    Bus = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WmSample {
    pub left: i32,
    pub right: i32,
}

impl From<WmSample> for StereoSample {
    fn from(s: WmSample) -> Self {
        StereoSample::new(s.left, s.right)
    }
}

impl From<StereoSample> for WmSample {
    fn from(s: StereoSample) -> Self {
        WmSample {
            left: s.left,
            right: s.right,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WmRates {
    pub bclk_freq_hz: f64,
    pub fs_hz: f64,
    pub lrc_period_ticks: u64,
    pub nominal_fs_hz: u32,
}

/// Opaque simulator handle.
pub struct WmSim {
    rt: Runtime,
    last_error: Option<CString>,
}

fn status_of(e: &RuntimeError) -> WmStatus {
    match e {
        RuntimeError::Sim(SimError::Contention { .. }) => WmStatus::Contention,
        RuntimeError::Sim(SimError::Timeout { .. })
        | RuntimeError::SyncTimeout { .. }
        | RuntimeError::I2cTimeout { .. } => WmStatus::Timeout,
        RuntimeError::Busy { .. } => WmStatus::Busy,
        RuntimeError::Config(_) | RuntimeError::SampleRange { .. } | RuntimeError::Stimulus(_) => {
            WmStatus::InvalidArgument
        }
        RuntimeError::Decode(_) => WmStatus::Decode,
        RuntimeError::I2cNack { .. } => WmStatus::Nack,
        RuntimeError::Bus(_) => WmStatus::Bus,
    }
}

fn guard(f: impl FnOnce() -> WmStatus) -> WmStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(WmStatus::Panic)
}

/// Run `f` on a live handle, recording any error message on it.
fn with_sim(sim: *mut WmSim, f: impl FnOnce(&mut Runtime) -> Result<(), RuntimeError>) -> WmStatus {
    guard(|| {
        // SAFETY: the caller passes a handle from `wm_sim_new` or null.
        let Some(sim) = (unsafe { sim.as_mut() }) else {
            return WmStatus::NullPointer;
        };
        match f(&mut sim.rt) {
            Ok(()) => {
                sim.last_error = None;
                WmStatus::Ok
            }
            Err(e) => {
                sim.last_error = CString::new(e.to_string()).ok();
                status_of(&e)
            }
        }
    })
}

/// Write `value` through `out` if it is non-null.
fn put<T>(out: *mut T, value: T) -> WmStatus {
    if out.is_null() {
        return WmStatus::NullPointer;
    }
    // SAFETY: non-null and supplied by the caller for writing.
    unsafe { out.write(value) };
    WmStatus::Ok
}

/// Create a simulator (FPGA interface plus codec model). `sclk_hz` of 0
/// selects the 200 kHz default.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_new(clk_divider: u32, bit_length: u32, sclk_hz: u32, out: *mut *mut WmSim) -> WmStatus {
    guard(|| {
        if out.is_null() {
            return WmStatus::NullPointer;
        }
        let sclk = if sclk_hz == 0 {
            wm8731_sim::i2c::DEFAULT_SCLK_HZ
        } else {
            sclk_hz
        };
        match SimConfig::new(clk_divider, bit_length, sclk, false) {
            Ok(cfg) => {
                let handle = Box::new(WmSim {
                    rt: Runtime::new(cfg),
                    last_error: None,
                });
                put(out, Box::into_raw(handle))
            }
            Err(_) => {
                put(out, ptr::null_mut());
                WmStatus::InvalidConfig
            }
        }
    })
}

/// # Safety
/// `sim` must come from [`wm_sim_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_free(sim: *mut WmSim) {
    if !sim.is_null() {
        // SAFETY: ownership returns from the caller.
        let _ = catch_unwind(AssertUnwindSafe(|| drop(unsafe { Box::from_raw(sim) })));
    }
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_step(sim: *mut WmSim, ticks: u64) -> WmStatus {
    with_sim(sim, |rt| {
        rt.sim_mut().step(ticks)?;
        Ok(())
    })
}

/// Ticks elapsed; 0 for a null handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_tick_count(sim: *const WmSim) -> u64 {
    // SAFETY: the caller passes a live handle or null.
    unsafe { sim.as_ref() }.map_or(0, |s| s.rt.tick())
}

/// # Safety
/// `sim` must be a live handle or null; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_bus_read(sim: *mut WmSim, offset: u32, value: *mut u32) -> WmStatus {
    if value.is_null() {
        return WmStatus::NullPointer;
    }
    let mut v = 0;
    let status = with_sim(sim, |rt| {
        v = rt.read_reg(offset)?;
        Ok(())
    });
    if status == WmStatus::Ok {
        put(value, v);
    }
    status
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_bus_write(sim: *mut WmSim, offset: u32, value: u32) -> WmStatus {
    with_sim(sim, |rt| rt.write_reg(offset, value))
}

/// Wait for the next DAC frame to finish; `tick` (may be null) receives
/// the tick count on return.
///
/// # Safety
/// `sim` must be a live handle or null; `tick` writable or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_sync_dac(sim: *mut WmSim, tick: *mut u64) -> WmStatus {
    let mut t = 0;
    let status = with_sim(sim, |rt| {
        t = rt.sync_dac()?;
        Ok(())
    });
    if status == WmStatus::Ok && !tick.is_null() {
        put(tick, t);
    }
    status
}

/// # Safety
/// `sim` must be a live handle or null; `tick` writable or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_sync_adc(sim: *mut WmSim, tick: *mut u64) -> WmStatus {
    let mut t = 0;
    let status = with_sim(sim, |rt| {
        t = rt.sync_adc()?;
        Ok(())
    });
    if status == WmStatus::Ok && !tick.is_null() {
        put(tick, t);
    }
    status
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_enable(sim: *mut WmSim, dac: bool, adc: bool) -> WmStatus {
    with_sim(sim, |rt| {
        rt.enable_dac(dac)?;
        rt.enable_adc(adc)
    })
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_write_sample(sim: *mut WmSim, sample: WmSample) -> WmStatus {
    with_sim(sim, |rt| rt.write_sample(sample.into()))
}

/// # Safety
/// `sim` must be a live handle or null; `sample` writable.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_read_sample(sim: *mut WmSim, sample: *mut WmSample) -> WmStatus {
    if sample.is_null() {
        return WmStatus::NullPointer;
    }
    let mut s = WmSample::default();
    let status = with_sim(sim, |rt| {
        s = rt.read_sample()?.into();
        Ok(())
    });
    if status == WmStatus::Ok {
        put(sample, s);
    }
    status
}

/// Blocking codec register write over I2C.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_i2c_write(sim: *mut WmSim, reg: u8, data: u16) -> WmStatus {
    with_sim(sim, |rt| {
        let cmd = I2cCommand::new(reg, data)?;
        rt.i2c_write(cmd)
    })
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_set_volume(sim: *mut WmSim, db: i32) -> WmStatus {
    with_sim(sim, |rt| {
        rt.set_volume(VolumeDb::new(db)?)?;
        Ok(())
    })
}

/// Send the standard codec configuration.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_setup_codec(sim: *mut WmSim, volume_db: i32) -> WmStatus {
    with_sim(sim, |rt| rt.setup_codec(VolumeDb::new(volume_db)?))
}

/// Queue `len` samples for the codec to send on the ADC lane.
///
/// # Safety
/// `samples` must point to `len` readable samples (or be null with len 0).
#[no_mangle]
pub unsafe extern "C" fn wm_sim_load_stimulus(sim: *mut WmSim, samples: *const WmSample, len: usize) -> WmStatus {
    if samples.is_null() && len != 0 {
        return WmStatus::NullPointer;
    }
    let slice = if len == 0 {
        &[][..]
    } else {
        // SAFETY: caller guarantees `len` readable samples.
        unsafe { std::slice::from_raw_parts(samples, len) }
    };
    with_sim(sim, |rt| {
        let bl = rt.bit_length();
        let nominal = rt.sim().rates().nominal_fs_hz();
        let stream = SampleStream::new(slice.iter().map(|&s| s.into()).collect(), bl, nominal)
            .map_err(|e| RuntimeError::Config(wm8731_sim::ConfigError::new("stimulus", e.to_string())))?;
        rt.load_stimulus(&stream)
    })
}

/// # Safety
/// `sim` must be a live handle or null; `len` writable.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_capture_len(sim: *mut WmSim, len: *mut usize) -> WmStatus {
    if len.is_null() {
        return WmStatus::NullPointer;
    }
    let mut n = 0;
    let status = with_sim(sim, |rt| {
        n = rt.capture()?.len();
        Ok(())
    });
    if status == WmStatus::Ok {
        put(len, n);
    }
    status
}

/// Copy up to `cap` captured DAC samples into `out`; `written` receives
/// the number copied.
///
/// # Safety
/// `out` must have room for `cap` samples; `written` writable.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_capture_copy(
    sim: *mut WmSim,
    out: *mut WmSample,
    cap: usize,
    written: *mut usize,
) -> WmStatus {
    if written.is_null() || (out.is_null() && cap != 0) {
        return WmStatus::NullPointer;
    }
    let mut n = 0;
    let status = with_sim(sim, |rt| {
        let stream = rt.capture()?;
        n = stream.len().min(cap);
        for (i, &s) in stream.samples()[..n].iter().enumerate() {
            // SAFETY: i < cap, caller guarantees room for cap samples.
            unsafe { out.add(i).write(s.into()) };
        }
        Ok(())
    });
    if status == WmStatus::Ok {
        put(written, n);
    }
    status
}

/// Current value of a codec register as seen by the codec model.
///
/// # Safety
/// `sim` must be a live handle or null; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_codec_reg(sim: *mut WmSim, reg: u8, value: *mut u16) -> WmStatus {
    if value.is_null() {
        return WmStatus::NullPointer;
    }
    let mut v = None;
    let status = with_sim(sim, |rt| {
        v = rt.sim().codec().and_then(|c| c.registers().read(reg));
        Ok(())
    });
    match (status, v) {
        (WmStatus::Ok, Some(v)) => put(value, v),
        (WmStatus::Ok, None) => WmStatus::InvalidArgument,
        (s, _) => s,
    }
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_run_sine(sim: *mut WmSim, freq_hz: f64, amplitude: f64, frames: u64) -> WmStatus {
    with_sim(sim, |rt| rt.run_sine_frames(freq_hz, amplitude, frames))
}

/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_run_passthrough(sim: *mut WmSim, frames: u64) -> WmStatus {
    with_sim(sim, |rt| rt.run_passthrough_frames(frames))
}

/// `gain_q16` is the per-branch mix gain, 65536 = 1.0.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_run_delay(sim: *mut WmSim, delay_samples: u32, gain_q16: u32, frames: u64) -> WmStatus {
    with_sim(sim, |rt| {
        let buffer = rt.sim().rates().nominal_fs_hz() as usize;
        let params = DelayParams::new(delay_samples as usize, gain_q16, buffer)?;
        rt.run_delay_frames(params, frames)
    })
}

/// Rates for a clock divider with the fixed 256 frame divider.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_derive_rates(clk_divider: u32, out: *mut WmRates) -> WmStatus {
    guard(|| {
        let Ok(cfg) = ClockConfig::new(clk_divider, wm8731_sim::clock::DEFAULT_FS_DIVIDER) else {
            return WmStatus::InvalidConfig;
        };
        let r = derive_rates(&cfg);
        put(
            out,
            WmRates {
                bclk_freq_hz: r.bclk_freq_hz,
                fs_hz: r.fs_hz,
                lrc_period_ticks: r.lrc_period_ticks,
                nominal_fs_hz: r.nominal_fs_hz(),
            },
        )
    })
}

/// Headphone gain code for `db` in [-73, 6].
///
/// # Safety
/// `code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wm_volume_code(db: i32, code: *mut u16) -> WmStatus {
    guard(|| match VolumeDb::new(db) {
        Ok(v) => put(code, v.code()),
        Err(_) => WmStatus::InvalidArgument,
    })
}

/// Whether `bits` is a supported word length.
#[no_mangle]
pub extern "C" fn wm_bit_length_supported(bits: u32) -> bool {
    BitLength::try_from(bits).is_ok()
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn wm_status_str(status: WmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        WmStatus::Ok => c"ok",
        WmStatus::NullPointer => c"null pointer",
        WmStatus::InvalidConfig => c"invalid configuration",
        WmStatus::InvalidArgument => c"invalid argument",
        WmStatus::Contention => c"bus contention",
        WmStatus::Timeout => c"timeout",
        WmStatus::Busy => c"busy",
        WmStatus::Decode => c"frame decode error",
        WmStatus::Nack => c"i2c not acknowledged",
        WmStatus::Bus => c"register bus error",
        WmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message for the last failing call on `sim`, or null. Valid until the
/// next call on the handle.
///
/// # Safety
/// `sim` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn wm_sim_last_error(sim: *const WmSim) -> *const c_char {
    // SAFETY: the caller passes a live handle or null.
    unsafe { sim.as_ref() }
        .and_then(|s| s.last_error.as_ref())
        .map_or(ptr::null(), |e| e.as_ptr())
}
