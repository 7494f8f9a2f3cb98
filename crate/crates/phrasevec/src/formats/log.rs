//! Training log: `epoch rec_loss rank_loss seconds`, tab separated.

use std::fmt::Write as _;

use phrasevec_core::trainer::EpochReport;

use super::format_f64;

pub const HEADER: &str = "epoch\trec_loss\trank_loss\tseconds";

pub fn format_log_line(r: &EpochReport) -> String {
    format!(
        "{}\t{}\t{}\t{}",
        r.epoch,
        format_f64(r.reconstruction_loss),
        format_f64(r.ranking_loss),
        format_f64(r.seconds)
    )
}

pub fn write_log(epochs: &[EpochReport]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for r in epochs {
        writeln!(out, "{}", format_log_line(r)).unwrap();
    }
    out
}

/// `(epoch, rec_loss, rank_loss, seconds)` rows.
pub fn parse_log(text: &str) -> Option<Vec<(usize, f64, f64, f64)>> {
    let mut lines = text.lines();
    if lines.next()? != HEADER {
        return None;
    }
    lines
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            match f[..] {
                [e, a, b, c] => Some((e.parse().ok()?, a.parse().ok()?, b.parse().ok()?, c.parse().ok()?)),
                _ => None,
            }
        })
        .collect()
}
