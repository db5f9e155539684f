//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dsme_lora::mac::{allocate_static_cells, NodeRole, SyncState};
use dsme_lora::report::{parse_trace, trace_csv};
use dsme_lora::sim::{summarize, RunOutput};
use dsme_lora::*;

const SIZES: [u32; 3] = [5, 10, 15];
const WARMUP: Micros = Micros::from_secs(300);

struct Check {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, detail: detail.into() }
}

struct Runs {
    all: Vec<(String, RunOutput)>,
    slowest: Duration,
}

impl Runs {
    fn run(&mut self, label: &str, s: &Scenario) -> RunOutput {
        let t = Instant::now();
        let out = run(s, &MacConfig::default(), &PhyConfig::default(), &CsmaParams::default())
            .unwrap_or_else(|e| panic!("{label}: {e}"));
        self.slowest = self.slowest.max(t.elapsed());
        self.all.push((label.to_string(), out.clone()));
        out
    }
}

fn experiment(mode: Mode, n: u32, interval_s: u64) -> Scenario {
    let mut s = Scenario::new(mode, n, Micros::from_secs(interval_s));
    s.warmup = WARMUP;
    s
}

fn fmt_prrs(v: &[f64]) -> String {
    v.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>().join("/")
}

fn relaxed_cfp(runs: &mut Runs) -> Check {
    let msf = MacConfig::default().multisuperframe_duration();
    let mut prrs = vec![];
    let mut late = vec![];
    for n in SIZES {
        let out = runs.run(&format!("cfp n={n} 20s"), &experiment(Mode::Cfp, n, 20));
        prrs.push(out.summary.prr);
        let over = out
            .records
            .iter()
            .filter(|r| r.gen_time >= WARMUP)
            .filter_map(|r| r.ttc())
            .filter(|&t| t > msf)
            .count();
        late.push(over);
    }
    let ok = prrs.iter().all(|&p| p >= 0.99) && late.iter().all(|&c| c == 0);
    check(ok, format!("prr {} (>= 0.99); delivered with ttc > {msf}: {late:?} (must be 0)", fmt_prrs(&prrs)))
}

fn stressed_cfp(runs: &mut Runs) -> Check {
    let cfg = MacConfig::default();
    let bound = t_qo(&cfg, cfg.queue_capacity);
    let mut prrs = vec![];
    let mut worst = Micros::ZERO;
    for n in SIZES {
        let out = runs.run(&format!("cfp n={n} 5s"), &experiment(Mode::Cfp, n, 5));
        prrs.push(out.summary.prr);
        worst = worst.max(out.summary.ttc_max.unwrap_or(Micros::ZERO));
    }
    let lo = prrs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = prrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ok = prrs.iter().all(|p| (p - 0.64).abs() <= 0.05) && hi - lo <= 0.03 && worst <= bound;
    check(
        ok,
        format!("prr {} (0.64 +- 0.05); spread {:.4} (<= 0.03); max ttc {worst} (<= {bound})", fmt_prrs(&prrs), hi - lo),
    )
}

fn relaxed_cap(runs: &mut Runs) -> Check {
    let prrs: Vec<f64> =
        SIZES.iter().map(|&n| runs.run(&format!("cap n={n} 20s"), &experiment(Mode::Cap, n, 20)).summary.prr).collect();
    check(prrs.iter().all(|&p| p >= 0.99), format!("prr {} (>= 0.99)", fmt_prrs(&prrs)))
}

fn stressed_cap(runs: &mut Runs) -> Check {
    let outs: Vec<RunOutput> =
        SIZES.iter().map(|&n| runs.run(&format!("cap n={n} 5s"), &experiment(Mode::Cap, n, 5))).collect();
    let prrs: Vec<f64> = outs.iter().map(|o| o.summary.prr).collect();
    let decreasing = prrs.windows(2).all(|w| w[1] < w[0]);
    let last = &outs[2];
    let attributed =
        last.summary.drop_channel_access > 0 && last.summary.drop_retry > 0 && last.stats.data_collisions > 0;
    check(
        decreasing && prrs[2] < 0.60 && attributed,
        format!(
            "prr {} (strictly decreasing, last < 0.60); n=15 drops: channel access {}, retry {}, collisions {}",
            fmt_prrs(&prrs),
            last.summary.drop_channel_access,
            last.summary.drop_retry,
            last.stats.data_collisions
        ),
    )
}

fn memory_model() -> Check {
    let slots = heap_usage(6, 3, &[]).slots;
    let packets = heap_usage(0, 0, &[25; 5]).packets;
    check(slots == 636 && packets == 585, format!("slots {slots} (636), packets {packets} (585)"))
}

fn gts_capacity() -> Check {
    let cfg = MacConfig::default();
    let ids = |n: u32, from: u32| (from..from + n).collect::<Vec<NodeId>>();
    let fits = allocate_static_cells(&ids(37, 1), &ids(3, 38), &cfg, 16).map(|c| c.len());
    let over = allocate_static_cells(&ids(38, 1), &ids(3, 39), &cfg, 16);
    let mut s = Scenario::new(Mode::Cfp, 38, Micros::from_secs(5));
    s.duration = Micros::from_secs(10);
    let via_run = run(&s, &cfg, &PhyConfig::default(), &CsmaParams::default()).err();
    let expected = Error::CapacityExceeded { required: 114, capacity: 112 };
    let ok = fits == Ok(111) && over.as_ref().err() == Some(&expected) && via_run.as_ref() == Some(&expected);
    let msg = over.err().map(|e| e.to_string()).unwrap_or_else(|| "no error".into());
    check(ok, format!("37x3 -> {:?} cells; 38x3 -> {msg}", fits.ok()))
}

/// Airtime from the closed-form LoRa expression, evaluated in floating point.
fn airtime_oracle_ms(sf: u32, payload: u32, de: bool) -> f64 {
    let ts = f64::from(1u32 << sf) / 125_000.0 * 1e3;
    let de = if de { 1.0 } else { 0.0 };
    let num = 8.0 * f64::from(payload) - 4.0 * f64::from(sf) + 28.0 + 16.0;
    let den = 4.0 * (f64::from(sf) - 2.0 * de);
    let n_payload = 8.0 + ((num / den).ceil() * 5.0).max(0.0);
    (8.0 + 4.25 + n_payload) * ts
}

fn airtime() -> Check {
    let phy = PhyConfig::default();
    let toa = phy.time_on_air(25).unwrap();
    let err_us = (toa.as_micros() as f64 - airtime_oracle_ms(7, 25, false) * 1e3).abs();
    let mut monotone = true;
    let mut oracle_ok = true;
    for sf in 7..=12 {
        for de in [false, true] {
            let p = PhyConfig { spreading_factor: sf, low_datarate_optimize: de, ..PhyConfig::default() };
            let mut prev = Micros::ZERO;
            for pl in 0..=255 {
                let t = p.time_on_air(pl).unwrap();
                monotone &= t >= prev;
                oracle_ok &= (t.as_micros() as f64 - airtime_oracle_ms(sf, pl, de) * 1e3).abs() <= 1.0;
                prev = t;
            }
        }
    }
    check(
        toa == Micros(61_696) && err_us <= 1.0 && monotone && oracle_ok,
        format!("toa(25 B) = {toa}, oracle error {err_us:.3} us; monotone {monotone}; oracle agreement SF7-12 {oracle_ok}"),
    )
}

fn determinism() -> Check {
    let cfg = MacConfig::default();
    let phy = PhyConfig::default();
    let csma = CsmaParams::default();
    let mut ok = true;
    for mode in [Mode::Cap, Mode::Cfp] {
        let s = experiment(mode, 15, 5);
        let a = trace_csv(&run(&s, &cfg, &phy, &csma).unwrap().records);
        let b = trace_csv(&run(&s, &cfg, &phy, &csma).unwrap().records);
        let mut other = s.clone();
        other.seed += 1;
        let c = trace_csv(&run(&other, &cfg, &phy, &csma).unwrap().records);
        ok &= a == b && a != c;
    }
    check(ok, "identical seeds give identical traces, a different seed changes them (CAP and CFP)")
}

fn conservation(runs: &Runs) -> Check {
    let mut failures = vec![];
    for (label, out) in &runs.all {
        let records = parse_trace(&trace_csv(&out.records)).expect("trace parses");
        let all = summarize(&records, Micros::ZERO, None);
        let post = summarize(&records, WARMUP, out.summary.t_qo);
        let ok = all.is_conserved()
            && all.generated == records.len() as u64
            && post.is_conserved()
            && post == out.summary;
        if !ok {
            failures.push(label.clone());
        }
    }
    check(failures.is_empty(), format!("{} runs checked from their traces; failing: {failures:?}", runs.all.len()))
}

fn synchronization() -> Check {
    let cfg = MacConfig::default();
    let bi = cfg.beacon_interval_duration();
    let bound_ns = (20.0 * bi.as_micros() as f64 * 1e-3) as i64;

    let mut s = experiment(Mode::Cfp, 15, 20);
    s.drift_ppm = 20.0;
    let out = run(&s, &cfg, &PhyConfig::default(), &CsmaParams::default()).unwrap();
    let listeners = out.stats.census.iter().filter(|c| c.role != NodeRole::Coordinator).count() as u64;
    let every_beacon_heard = out.stats.beacons_heard == out.stats.beacons_sent * listeners;
    let sim_max = out.stats.max_pre_beacon_offset_ns;

    // Replay one node's clock across the same beacon schedule.
    let mut sync = SyncState::new(20.0, Micros::ZERO);
    let mut resets = true;
    let mut t = Micros::ZERO;
    while t + bi <= s.duration {
        t += bi;
        let pre = sync.on_beacon(t);
        resets &= pre.abs() <= bound_ns && sync.offset_at(t) == 0 && sync.clock_offset_ns == 0;
    }
    check(
        sim_max > 0 && sim_max <= bound_ns && every_beacon_heard && resets,
        format!(
            "max pre-beacon offset {sim_max} ns (<= {bound_ns} ns); beacons heard {}/{}; reset to 0 after each beacon {resets}",
            out.stats.beacons_heard,
            out.stats.beacons_sent * listeners
        ),
    )
}

fn main() -> ExitCode {
    let mut runs = Runs { all: vec![], slowest: Duration::ZERO };
    let results = [
        ("1 relaxed CFP", relaxed_cfp(&mut runs)),
        ("2 stressed CFP", stressed_cfp(&mut runs)),
        ("3 relaxed CAP", relaxed_cap(&mut runs)),
        ("4 stressed CAP", stressed_cap(&mut runs)),
        ("5 memory model", memory_model()),
        ("6 GTS capacity", gts_capacity()),
        ("7 airtime", airtime()),
        ("8 determinism", determinism()),
        ("9 conservation", conservation(&runs)),
        ("10 synchronization", synchronization()),
    ];
    let mut failed = 0;
    for (name, c) in &results {
        println!("criterion {name}: {} - {}", if c.ok { "PASS" } else { "FAIL" }, c.detail);
        failed += usize::from(!c.ok);
    }
    println!("slowest single run: {:.2?} (budget 10 s)", runs.slowest);
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 && runs.slowest < Duration::from_secs(10) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
