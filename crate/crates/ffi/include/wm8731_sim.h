/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef WM8731_SIM_H
#define WM8731_SIM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Register offsets from [`WM_AUDIO_BASE`].
#define WM_REG_DAC_L 0

#define WM_REG_DAC_R 4

#define WM_REG_DAC_EN 8

#define WM_REG_ADC_L 12

#define WM_REG_ADC_R 16

#define WM_REG_ADC_EN 20

#define WM_REG_STATUS 24

#define WM_REG_I2C_DATA 28

#define WM_REG_I2C_STATUS 32

#define WM_AUDIO_BASE 4027252736

#define WM_STATUS_DAC_BUSY (1 << 0)

#define WM_STATUS_ADC_BUSY (1 << 1)

#define WM_STATUS_DAC_LRC_SEEN (1 << 2)

#define WM_STATUS_ADC_LRC_SEEN (1 << 3)

#define WM_I2C_STATUS_BUSY (1 << 0)

#define WM_I2C_STATUS_NACK (1 << 1)

typedef enum {
  WM_STATUS_OK = 0,
  WM_STATUS_NULL_POINTER = 1,
  WM_STATUS_INVALID_CONFIG = 2,
  WM_STATUS_INVALID_ARGUMENT = 3,
  WM_STATUS_CONTENTION = 4,
  WM_STATUS_TIMEOUT = 5,
  WM_STATUS_BUSY = 6,
  WM_STATUS_DECODE = 7,
  WM_STATUS_NACK = 8,
  WM_STATUS_BUS = 9,
  WM_STATUS_PANIC = 10,
} WmStatus;

// Opaque simulator handle.
typedef struct WmSim WmSim;

typedef struct {
  int32_t left;
  int32_t right;
} WmSample;

typedef struct {
  double bclk_freq_hz;
  double fs_hz;
  uint64_t lrc_period_ticks;
  uint32_t nominal_fs_hz;
} WmRates;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Create a simulator (FPGA interface plus codec model). `sclk_hz` of 0
// selects the 200 kHz default.
//
// # Safety
// `out` must be a valid pointer to write the handle to.
WmStatus wm_sim_new(uint32_t clk_divider, uint32_t bit_length, uint32_t sclk_hz, WmSim **out);

// # Safety
// `sim` must come from [`wm_sim_new`] and not be used afterwards.
void wm_sim_free(WmSim *sim);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_step(WmSim *sim, uint64_t ticks);

// Ticks elapsed; 0 for a null handle.
//
// # Safety
// `sim` must be a live handle or null.
uint64_t wm_sim_tick_count(const WmSim *sim);

// # Safety
// `sim` must be a live handle or null; `value` writable.
WmStatus wm_sim_bus_read(WmSim *sim, uint32_t offset, uint32_t *value);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_bus_write(WmSim *sim, uint32_t offset, uint32_t value);

// Wait for the next DAC frame to finish; `tick` (may be null) receives
// the tick count on return.
//
// # Safety
// `sim` must be a live handle or null; `tick` writable or null.
WmStatus wm_sim_sync_dac(WmSim *sim, uint64_t *tick);

// # Safety
// `sim` must be a live handle or null; `tick` writable or null.
WmStatus wm_sim_sync_adc(WmSim *sim, uint64_t *tick);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_enable(WmSim *sim, bool dac, bool adc);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_write_sample(WmSim *sim, WmSample sample);

// # Safety
// `sim` must be a live handle or null; `sample` writable.
WmStatus wm_sim_read_sample(WmSim *sim, WmSample *sample);

// Blocking codec register write over I2C.
//
// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_i2c_write(WmSim *sim, uint8_t reg, uint16_t data);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_set_volume(WmSim *sim, int32_t db);

// Send the standard codec configuration.
//
// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_setup_codec(WmSim *sim, int32_t volume_db);

// Queue `len` samples for the codec to send on the ADC lane.
//
// # Safety
// `samples` must point to `len` readable samples (or be null with len 0).
WmStatus wm_sim_load_stimulus(WmSim *sim, const WmSample *samples, size_t len);

// # Safety
// `sim` must be a live handle or null; `len` writable.
WmStatus wm_sim_capture_len(WmSim *sim, size_t *len);

// Copy up to `cap` captured DAC samples into `out`; `written` receives
// the number copied.
//
// # Safety
// `out` must have room for `cap` samples; `written` writable.
WmStatus wm_sim_capture_copy(WmSim *sim, WmSample *out, size_t cap, size_t *written);

// Current value of a codec register as seen by the codec model.
//
// # Safety
// `sim` must be a live handle or null; `value` writable.
WmStatus wm_sim_codec_reg(WmSim *sim, uint8_t reg, uint16_t *value);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_run_sine(WmSim *sim, double freq_hz, double amplitude, uint64_t frames);

// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_run_passthrough(WmSim *sim, uint64_t frames);

// `gain_q16` is the per-branch mix gain, 65536 = 1.0.
//
// # Safety
// `sim` must be a live handle or null.
WmStatus wm_sim_run_delay(WmSim *sim, uint32_t delay_samples, uint32_t gain_q16, uint64_t frames);

// Rates for a clock divider with the fixed 256 frame divider.
//
// # Safety
// `out` must be writable.
WmStatus wm_derive_rates(uint32_t clk_divider, WmRates *out);

// Headphone gain code for `db` in [-73, 6].
//
// # Safety
// `code` must be writable.
WmStatus wm_volume_code(int32_t db, uint16_t *code);

// Whether `bits` is a supported word length.
bool wm_bit_length_supported(uint32_t bits);

// Static, NUL-terminated name of a status code.
const char *wm_status_str(WmStatus status);

// Message for the last failing call on `sim`, or null. Valid until the
// next call on the handle.
//
// # Safety
// `sim` must be a live handle or null.
const char *wm_sim_last_error(const WmSim *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WM8731_SIM_H */
