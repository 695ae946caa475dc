use std::ffi::CStr;
use std::ptr;

use wm8731_sim_ffi::*;

struct Handle(*mut WmSim);

impl Handle {
    fn new(bits: u32) -> Self {
        let mut sim = ptr::null_mut();
        let status = unsafe { wm_sim_new(6, bits, 0, &mut sim) };
        assert_eq!(status, WmStatus::Ok);
        assert!(!sim.is_null());
        Handle(sim)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { wm_sim_free(self.0) };
    }
}

fn capture(h: &Handle) -> Vec<WmSample> {
    let mut len = 0;
    assert_eq!(unsafe { wm_sim_capture_len(h.0, &mut len) }, WmStatus::Ok);
    let mut out = vec![WmSample::default(); len];
    let mut written = 0;
    let status = unsafe { wm_sim_capture_copy(h.0, out.as_mut_ptr(), out.len(), &mut written) };
    assert_eq!(status, WmStatus::Ok);
    assert_eq!(written, len);
    out
}

#[test]
fn bad_config_yields_null_handle() {
    let mut sim = std::ptr::dangling_mut::<WmSim>();
    assert_eq!(unsafe { wm_sim_new(6, 18, 0, &mut sim) }, WmStatus::InvalidConfig);
    assert!(sim.is_null());
    assert_eq!(unsafe { wm_sim_new(6, 16, 0, ptr::null_mut()) }, WmStatus::NullPointer);
    unsafe { wm_sim_free(ptr::null_mut()) };
}

#[test]
fn null_handle_is_reported() {
    assert_eq!(unsafe { wm_sim_step(ptr::null_mut(), 1) }, WmStatus::NullPointer);
    assert_eq!(unsafe { wm_sim_tick_count(ptr::null()) }, 0);
    assert!(unsafe { wm_sim_last_error(ptr::null()) }.is_null());
    let mut v = 0;
    assert_eq!(
        unsafe { wm_sim_bus_read(ptr::null_mut(), WM_REG_STATUS, &mut v) },
        WmStatus::NullPointer
    );
}

#[test]
fn rates_for_divider_six() {
    let mut r = WmRates::default();
    assert_eq!(unsafe { wm_derive_rates(6, &mut r) }, WmStatus::Ok);
    assert_eq!(r.lrc_period_ticks, 1536);
    assert_eq!(r.nominal_fs_hz, 52_083);
    assert!((r.bclk_freq_hz - 80e6 / 6.0).abs() < 1e-6);
    assert!((r.fs_hz - 80e6 / 1536.0).abs() < 1e-9);
    assert_eq!(unsafe { wm_derive_rates(0, &mut r) }, WmStatus::InvalidConfig);
}

#[test]
fn volume_codes() {
    let mut code = 0;
    for (db, want) in [(-73, 48), (0, 121), (6, 127)] {
        assert_eq!(unsafe { wm_volume_code(db, &mut code) }, WmStatus::Ok);
        assert_eq!(code, want);
    }
    assert_eq!(unsafe { wm_volume_code(7, &mut code) }, WmStatus::InvalidArgument);
    assert_eq!(unsafe { wm_volume_code(-74, &mut code) }, WmStatus::InvalidArgument);
}

#[test]
fn supported_lengths() {
    let ok: Vec<u32> = (0..40).filter(|&b| wm_bit_length_supported(b)).collect();
    assert_eq!(ok, vec![16, 20, 24, 32]);
}

#[test]
fn bus_round_trip() {
    let h = Handle::new(16);
    let mut v = 0;
    assert_eq!(unsafe { wm_sim_bus_write(h.0, WM_REG_DAC_L, 0x1234) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_bus_read(h.0, WM_REG_DAC_L, &mut v) }, WmStatus::Ok);
    assert_eq!(v, 0x1234);
    assert_eq!(unsafe { wm_sim_bus_read(h.0, 0x3, &mut v) }, WmStatus::Bus);
    assert!(!unsafe { wm_sim_last_error(h.0) }.is_null());
}

#[test]
fn dac_sync_is_one_frame_apart() {
    let h = Handle::new(16);
    assert_eq!(unsafe { wm_sim_enable(h.0, true, false) }, WmStatus::Ok);
    let (mut a, mut b) = (0, 0);
    assert_eq!(unsafe { wm_sim_sync_dac(h.0, &mut a) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_sync_dac(h.0, &mut b) }, WmStatus::Ok);
    assert_eq!(b - a, 1536);
    assert_eq!(unsafe { wm_sim_tick_count(h.0) }, b);
    assert_eq!(unsafe { wm_sim_sync_dac(h.0, ptr::null_mut()) }, WmStatus::Ok);
}

#[test]
fn sync_without_enable_times_out() {
    let h = Handle::new(16);
    let status = unsafe { wm_sim_sync_dac(h.0, ptr::null_mut()) };
    assert_eq!(status, WmStatus::Timeout);
    let msg = unsafe { wm_sim_last_error(h.0) };
    assert!(!msg.is_null());
    assert!(!unsafe { CStr::from_ptr(msg) }.to_bytes().is_empty());

    assert_eq!(unsafe { wm_sim_step(h.0, 1) }, WmStatus::Ok);
    assert!(unsafe { wm_sim_last_error(h.0) }.is_null());
}

#[test]
fn written_sample_reaches_the_codec() {
    let h = Handle::new(24);
    let s = WmSample {
        left: -8_388_608,
        right: 8_388_607,
    };
    assert_eq!(unsafe { wm_sim_enable(h.0, true, false) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_write_sample(h.0, s) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_sync_dac(h.0, ptr::null_mut()) }, WmStatus::Ok);
    assert_eq!(capture(&h), vec![s]);

    let wide = WmSample {
        left: 1 << 23,
        right: 0,
    };
    assert_eq!(unsafe { wm_sim_write_sample(h.0, wide) }, WmStatus::InvalidArgument);
}

#[test]
fn passthrough_shifts_by_one_frame() {
    let h = Handle::new(16);
    let input: Vec<WmSample> = (0..64)
        .map(|i| WmSample {
            left: i * 100,
            right: -i * 7,
        })
        .collect();
    assert_eq!(unsafe { wm_sim_setup_codec(h.0, 0) }, WmStatus::Ok);
    assert_eq!(
        unsafe { wm_sim_load_stimulus(h.0, input.as_ptr(), input.len()) },
        WmStatus::Ok
    );
    assert_eq!(unsafe { wm_sim_run_passthrough(h.0, input.len() as u64) }, WmStatus::Ok);
    let out = capture(&h);
    assert_eq!(out.len(), input.len());
    assert_eq!(out[0], WmSample::default());
    assert_eq!(&out[1..], &input[..input.len() - 1]);
}

#[test]
fn delay_impulse() {
    let h = Handle::new(16);
    let mut input = vec![WmSample::default(); 40];
    input[0] = WmSample {
        left: 1000,
        right: -1000,
    };
    assert_eq!(unsafe { wm_sim_setup_codec(h.0, 0) }, WmStatus::Ok);
    assert_eq!(
        unsafe { wm_sim_load_stimulus(h.0, input.as_ptr(), input.len()) },
        WmStatus::Ok
    );
    assert_eq!(unsafe { wm_sim_run_delay(h.0, 10, 1 << 15, 40) }, WmStatus::Ok);
    let out = capture(&h);
    let spikes: Vec<usize> = (0..out.len()).filter(|&i| out[i] != WmSample::default()).collect();
    assert_eq!(spikes, vec![1, 11]);
    assert_eq!(out[1], WmSample { left: 500, right: -500 });
}

#[test]
fn sine_rejects_nyquist() {
    let h = Handle::new(16);
    assert_eq!(
        unsafe { wm_sim_run_sine(h.0, 30_000.0, 0.5, 4) },
        WmStatus::InvalidArgument
    );
    assert_eq!(unsafe { wm_sim_run_sine(h.0, 1000.0, 0.5, 4) }, WmStatus::Ok);
    assert_eq!(capture(&h).len(), 4);
}

#[test]
fn i2c_write_updates_codec_register() {
    let h = Handle::new(16);
    let mut v = 0;
    assert_eq!(unsafe { wm_sim_i2c_write(h.0, 0x07, 0x04A) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_codec_reg(h.0, 0x07, &mut v) }, WmStatus::Ok);
    assert_eq!(v, 0x04A);

    assert_eq!(unsafe { wm_sim_set_volume(h.0, -10) }, WmStatus::Ok);
    assert_eq!(unsafe { wm_sim_codec_reg(h.0, 0x02, &mut v) }, WmStatus::Ok);
    assert_eq!(v, 0x100 | 111);
    assert_eq!(unsafe { wm_sim_set_volume(h.0, 9) }, WmStatus::InvalidArgument);
    assert_eq!(unsafe { wm_sim_i2c_write(h.0, 0x80, 0) }, WmStatus::InvalidArgument);
}

#[test]
fn status_names() {
    let name = |s| unsafe { CStr::from_ptr(wm_status_str(s)) }.to_str().unwrap().to_owned();
    assert_eq!(name(WmStatus::Ok), "ok");
    assert_eq!(name(WmStatus::Timeout), "timeout");
    assert_eq!(name(WmStatus::Panic), "internal panic");
}

#[test]
fn header_declares_the_api() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/wm8731_sim.h");
    let header = std::fs::read_to_string(path).unwrap();
    for needle in [
        "typedef struct WmSim WmSim;",
        "WM_STATUS_TIMEOUT = 5",
        "#define WM_REG_I2C_DATA 28",
        "#define WM_AUDIO_BASE 4027252736",
        "WmStatus wm_sim_new(uint32_t clk_divider",
        "void wm_sim_free(WmSim *sim);",
        "WmStatus wm_sim_capture_copy(",
        "const char *wm_status_str(WmStatus status);",
    ] {
        assert!(header.contains(needle), "header lacks {needle:?}");
    }
}
