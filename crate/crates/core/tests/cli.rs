use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use wm8731_sim::wav::{read_wav, write_wav};
use wm8731_sim::{BitLength, SampleStream, StereoSample};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wm8731-sim"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let out = bin().current_dir(dir).args(args).output().unwrap();
    out
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "status {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sine_run_writes_all_artifacts() {
    let dir = TempDir::new().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--experiment",
            "sine",
            "--duration-s",
            "0.1",
            "--out",
            "s.wav",
            "--summary",
            "s.json",
        ],
    );
    ok(&out);
    let summary = json(&dir.path().join("s.json"));
    assert_eq!(summary["lrc_period_ticks"], 1536);
    assert_eq!(summary["nominal_fs_hz"], 52083);
    assert_eq!(summary["frames"], 5208);
    let wav = read_wav(&dir.path().join("s.wav"), BitLength::B16).unwrap();
    assert_eq!(wav.len(), 5208);
    assert_eq!(wav.nominal_rate_hz(), 52_083);
}

#[test]
fn summary_goes_to_stdout_without_path() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["run", "--experiment", "config-dump"]);
    ok(&out);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["i2c_transactions"], 11);
    assert_eq!(v["write_log"].as_array().unwrap().len(), 11);
}

#[test]
fn passthrough_wav_is_shifted_one_sample() {
    let dir = TempDir::new().unwrap();
    let ramp: Vec<StereoSample> = (0..600).map(|v| StereoSample::new(v * 10, -v)).collect();
    let input = SampleStream::new(ramp.clone(), BitLength::B16, 52_083).unwrap();
    write_wav(&input, &dir.path().join("ramp.wav")).unwrap();
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--experiment",
            "passthrough",
            "--in",
            "ramp.wav",
            "--out",
            "o.wav",
            "--summary",
            "p.json",
        ],
    );
    ok(&out);
    let cap = read_wav(&dir.path().join("o.wav"), BitLength::B16).unwrap();
    assert_eq!(cap.len(), 600);
    assert_eq!(cap.samples()[0], StereoSample::SILENCE);
    assert_eq!(&cap.samples()[1..], &ramp[..599]);
}

#[test]
fn delay_impulse_gives_two_spikes() {
    let dir = TempDir::new().unwrap();
    let mut x = vec![StereoSample::SILENCE; 400];
    x[0] = StereoSample::mono(16_000);
    let input = SampleStream::new(x, BitLength::B16, 52_083).unwrap();
    write_wav(&input, &dir.path().join("imp.wav")).unwrap();
    // 0.005 s at 52083.33 Hz rounds to 260 samples.
    let out = run_in(
        dir.path(),
        &[
            "run",
            "--experiment",
            "delay",
            "--delay-s",
            "0.005",
            "--in",
            "imp.wav",
            "--out",
            "d.wav",
            "--summary",
            "d.json",
        ],
    );
    ok(&out);
    assert_eq!(json(&dir.path().join("d.json"))["delay_samples"], 260);
    let cap = read_wav(&dir.path().join("d.wav"), BitLength::B16).unwrap();
    let spikes: Vec<usize> = cap
        .samples()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.left != 0)
        .map(|(i, _)| i)
        .collect();
    assert_eq!(spikes, vec![1, 261]);
    assert_eq!(cap.samples()[1], StereoSample::mono(8_000));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    for tag in ["a", "b"] {
        let wav = format!("{tag}.wav");
        let vcd = format!("{tag}.vcd");
        let js = format!("{tag}.json");
        let out = run_in(
            dir.path(),
            &[
                "run",
                "--duration-s",
                "0.005",
                "--freq-hz",
                "1000",
                "--out",
                &wav,
                "--vcd",
                &vcd,
                "--summary",
                &js,
            ],
        );
        ok(&out);
    }
    for ext in ["wav", "vcd", "json"] {
        let a = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert!(!a.is_empty());
        assert!(a == b, "{ext} differs");
    }
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = TempDir::new().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "experiment = \"sine\"\nduration_s = 0.002\n[sine]\nfreq_hz = 1000.0\n[audio]\nbit_length = 24\n[io]\nsummary = \"cfg.json\"\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &["run", "--config", "run.toml", "--freq-hz", "2000"]);
    ok(&out);
    let v = json(&dir.path().join("cfg.json"));
    assert_eq!(v["bit_length"], 24);
    assert_eq!(v["freq_hz"], 2000.0);
    assert_eq!(v["frames"], 104);
}

#[test]
fn invalid_config_reports_field_path() {
    let dir = TempDir::new().unwrap();
    let out = run_in(dir.path(), &["run", "--clk-div", "5"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("clock.divider"), "{err}");

    let out = run_in(dir.path(), &["run", "--volume-db", "-80"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("volume_db"));
}

#[test]
fn decode_config_dump_trace() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(
        dir.path(),
        &[
            "run",
            "--experiment",
            "config-dump",
            "--vcd",
            "c.vcd",
            "--summary",
            "c.json",
        ],
    ));
    let out = run_in(dir.path(), &["decode-trace", "c.vcd"]);
    ok(&out);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("i2c") && l.ends_with(" ok"))
            .count(),
        11
    );
    assert!(text.contains("0 dac frames"));
}

/// Delete the first falling edge of `dac_lrc`, so the pulse spans a whole
/// frame.
fn widen_first_lrc(vcd: &str) -> String {
    let id = vcd
        .lines()
        .find_map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f.len() >= 5 && f[0] == "$var" && f[4] == "dac_lrc").then(|| f[3].to_string())
        })
        .unwrap();
    let rise = format!("1{id}");
    let fall = format!("0{id}");
    let mut seen_rise = false;
    let mut dropped = false;
    let mut past_defs = false;
    let mut out = String::new();
    for line in vcd.lines() {
        if line.starts_with("$enddefinitions") {
            past_defs = true;
        }
        if past_defs && !dropped {
            if line == rise {
                seen_rise = true;
            } else if seen_rise && line == fall {
                dropped = true;
                continue;
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    assert!(dropped);
    out
}

#[test]
fn tampered_lrc_fails_decode() {
    let dir = TempDir::new().unwrap();
    ok(&run_in(
        dir.path(),
        &["run", "--duration-s", "0.001", "--vcd", "t.vcd", "--summary", "t.json"],
    ));
    let clean = run_in(dir.path(), &["decode-trace", "t.vcd"]);
    ok(&clean);
    assert!(String::from_utf8_lossy(&clean.stdout).contains("dac  tick="));

    let text = std::fs::read_to_string(dir.path().join("t.vcd")).unwrap();
    std::fs::write(dir.path().join("bad.vcd"), widen_first_lrc(&text)).unwrap();
    let out = run_in(dir.path(), &["decode-trace", "bad.vcd"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("LRC width"));
}

#[test]
fn unparsable_vcd_is_an_error() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("junk.vcd"), "not a vcd at all").unwrap();
    let out = run_in(dir.path(), &["decode-trace", "junk.vcd"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
