//! CSV rendering and parsing of sweep results.

use crate::config::ChannelModel;
use crate::error::{Error, Result};

use super::sweep::{SchemeStats, SweepRow};

pub const CSV_HEADER: &str = "scheme,channel,snr_db,trials,avg_sum_rate,std_err,seed,config_hash";
pub const STATS_HEADER: &str = "scheme,snr_db,mean_lambda_star,mean_bbu_power,mean_nodes,exact_fraction";

/// Floats use the shortest round-trip representation, so parsing restores them bit for bit.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.scheme, r.channel, r.snr_db, r.trials, r.avg_sum_rate, r.std_err, r.seed, r.config_hash
        ));
    }
    out
}

pub fn stats_to_csv(stats: &[SchemeStats]) -> String {
    let mut out = String::from(STATS_HEADER);
    out.push('\n');
    for s in stats {
        let lambda = s.mean_lambda_star.map_or_else(String::new, |l| l.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            s.scheme, s.snr_db, lambda, s.mean_bbu_power, s.mean_nodes, s.exact_fraction
        ));
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, header)) = lines.next() else {
        return Err(Error::Csv("input is empty".into()));
    };
    if header.trim() != CSV_HEADER {
        return Err(Error::Csv(format!("unexpected header `{}`", header.trim())));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Csv(format!("line {lineno}: expected 8 fields, found {}", fields.len())));
        }
        let err = |what: &str| Error::Csv(format!("line {lineno}: invalid {what}"));
        let channel: ChannelModel = fields[1].parse().map_err(|_| err("channel"))?;
        rows.push(SweepRow {
            scheme: fields[0].to_string(),
            channel,
            snr_db: fields[2].parse().map_err(|_| err("snr_db"))?,
            trials: fields[3].parse().map_err(|_| err("trials"))?,
            avg_sum_rate: fields[4].parse().map_err(|_| err("avg_sum_rate"))?,
            std_err: fields[5].parse().map_err(|_| err("std_err"))?,
            seed: fields[6].parse().map_err(|_| err("seed"))?,
            config_hash: fields[7].to_string(),
        });
    }
    if rows.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    Ok(rows)
}
