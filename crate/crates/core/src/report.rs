//! Text formats for run results: per-packet trace CSV, summary JSON and the
//! cumulative TTC distribution.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{sorted_ttcs, PacketRecord, PacketStatus, Summary};
use crate::time::Micros;

pub const TRACE_HEADER: &str = "pkt_id,src,dst,gen_time_ms,ttc_ms,status,retries,cell_slot,cell_channel";
pub const CDF_HEADER: &str = "ttc_ms,cdf";
pub const SUMMARY_CSV_HEADER: &str =
    "generated,delivered,drop_queue,drop_channel_access,drop_retry,in_flight,prr,ttc_p50,ttc_p95,ttc_max,t_qo";

/// Rounds to six significant digits. Serialising the result gives the
/// shortest decimal that reads back to it, so output stays stable.
pub fn six_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn ms(t: Micros) -> f64 {
    t.as_micros() as f64 / 1_000.0
}

pub fn trace_csv(records: &[PacketRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let ttc = r.ttc().map(Micros::fmt_millis).unwrap_or_default();
        let (slot, ch) = match r.cell {
            Some((s, c)) => (s.to_string(), c.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.pkt_id,
            r.src,
            r.dst,
            r.gen_time.fmt_millis(),
            ttc,
            r.status.as_str(),
            r.retries,
            slot,
            ch
        );
    }
    out
}

/// Reads a trace back into records. Completion times are rebuilt from
/// generation time plus TTC.
pub fn parse_trace(text: &str) -> Result<Vec<PacketRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TRACE_HEADER => {}
        _ => return Err(Error::MalformedTrace { line: 1, reason: "missing header".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::MalformedTrace { line: i + 1, reason: reason.to_string() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad("expected 9 fields"));
        }
        let gen_time = Micros::parse_millis(f[3]).ok_or_else(|| bad("gen_time_ms"))?;
        let completion_time = match f[4] {
            "" => None,
            s => Some(gen_time + Micros::parse_millis(s).ok_or_else(|| bad("ttc_ms"))?),
        };
        let cell = match (f[7], f[8]) {
            ("", "") => None,
            (s, c) => Some((s.parse().map_err(|_| bad("cell_slot"))?, c.parse().map_err(|_| bad("cell_channel"))?)),
        };
        out.push(PacketRecord {
            pkt_id: f[0].parse().map_err(|_| bad("pkt_id"))?,
            src: f[1].parse().map_err(|_| bad("src"))?,
            dst: f[2].parse().map_err(|_| bad("dst"))?,
            gen_time,
            completion_time,
            status: PacketStatus::parse(f[5]).ok_or_else(|| bad("status"))?,
            retries: f[6].parse().map_err(|_| bad("retries"))?,
            cell,
        });
    }
    Ok(out)
}

#[derive(Serialize)]
struct SummaryJson {
    generated: u64,
    delivered: u64,
    drop_queue: u64,
    drop_channel_access: u64,
    drop_retry: u64,
    in_flight: u64,
    prr: f64,
    ttc_p50: Option<f64>,
    ttc_p95: Option<f64>,
    ttc_max: Option<f64>,
    t_qo: Option<f64>,
}

/// Summary as pretty JSON. Durations are in milliseconds.
pub fn summary_json(s: &Summary) -> String {
    let j = SummaryJson {
        generated: s.generated,
        delivered: s.delivered,
        drop_queue: s.drop_queue,
        drop_channel_access: s.drop_channel_access,
        drop_retry: s.drop_retry,
        in_flight: s.in_flight,
        prr: six_sig(s.prr),
        ttc_p50: s.ttc_p50.map(|t| six_sig(ms(t))),
        ttc_p95: s.ttc_p95.map(|t| six_sig(ms(t))),
        ttc_max: s.ttc_max.map(|t| six_sig(ms(t))),
        t_qo: s.t_qo.map(|t| six_sig(ms(t))),
    };
    let mut text = serde_json::to_string_pretty(&j).expect("summary serialises");
    text.push('\n');
    text
}

/// One aggregate row matching [`SUMMARY_CSV_HEADER`].
pub fn summary_csv_row(s: &Summary) -> String {
    let opt = |t: Option<Micros>| t.map(Micros::fmt_millis).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        s.generated,
        s.delivered,
        s.drop_queue,
        s.drop_channel_access,
        s.drop_retry,
        s.in_flight,
        six_sig(s.prr),
        opt(s.ttc_p50),
        opt(s.ttc_p95),
        opt(s.ttc_max),
        opt(s.t_qo)
    )
}

/// Empirical CDF of delivered TTCs for packets generated at or after `warmup`.
pub fn cdf_csv(records: &[PacketRecord], warmup: Micros) -> String {
    let v = sorted_ttcs(records, warmup);
    let n = v.len() as f64;
    let mut out = String::from(CDF_HEADER);
    out.push('\n');
    for (i, t) in v.iter().enumerate() {
        let _ = writeln!(out, "{},{}", t.fmt_millis(), six_sig((i + 1) as f64 / n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::summarize;

    fn rec(id: u64, gen: u64, done: Option<u64>, status: PacketStatus, cell: Option<(u32, u32)>) -> PacketRecord {
        PacketRecord {
            pkt_id: id,
            src: 1,
            dst: 16,
            gen_time: Micros(gen),
            completion_time: done.map(Micros),
            status,
            retries: 0,
            cell,
        }
    }

    #[test]
    fn trace_rows() {
        let rs = vec![
            rec(0, 1_500, Some(63_196), PacketStatus::Delivered, Some((9, 0))),
            rec(1, 2_000_000, None, PacketStatus::DropQueue, None),
        ];
        let csv = trace_csv(&rs);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_HEADER);
        assert_eq!(lines[1], "0,1,16,1.500,61.696,Delivered,0,9,0");
        assert_eq!(lines[2], "1,1,16,2000.000,,DropQueue,0,,");
        assert_eq!(parse_trace(&csv).unwrap(), rs);
    }

    #[test]
    fn trace_parse_rejects_garbage() {
        assert!(parse_trace("").is_err());
        let bad = format!("{TRACE_HEADER}\n0,1,16,1.500,,Lost,0,,\n");
        assert_eq!(
            parse_trace(&bad),
            Err(Error::MalformedTrace { line: 2, reason: "status".into() })
        );
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(six_sig(0.63215491), 0.632155);
        assert_eq!(six_sig(7864.32), 7864.32);
        assert_eq!(six_sig(62914.56), 62914.6);
        assert_eq!(six_sig(1.0), 1.0);
        assert_eq!(six_sig(0.0), 0.0);
    }

    #[test]
    fn summary_json_field_names() {
        let rs = vec![rec(0, 0, Some(100_000), PacketStatus::Delivered, None)];
        let s = summarize(&rs, Micros::ZERO, None);
        let v: serde_json::Value = serde_json::from_str(&summary_json(&s)).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        for k in ["generated", "delivered", "drop_queue", "drop_channel_access", "drop_retry", "in_flight", "prr", "ttc_p50", "ttc_p95", "ttc_max", "t_qo"] {
            assert!(keys.iter().any(|x| x == k), "{k}");
        }
        assert_eq!(v["prr"], 1.0);
        assert_eq!(v["ttc_p50"], 100.0);
        assert!(v["t_qo"].is_null());
    }

    #[test]
    fn cdf_is_cumulative() {
        let rs: Vec<_> = (1..=4)
            .map(|i| rec(i, 0, Some(i * 1_000), PacketStatus::Delivered, None))
            .chain([rec(9, 0, None, PacketStatus::DropRetry, None)])
            .collect();
        assert_eq!(cdf_csv(&rs, Micros::ZERO), "ttc_ms,cdf\n1.000,0.25\n2.000,0.5\n3.000,0.75\n4.000,1\n");
    }
}
