use std::fmt::Write as _;

use super::RunMetrics;

pub const METRICS_HEADER: &str = "epoch,retained,backprop_cum,train_loss,test_acc";
pub const HISTOGRAM_HEADER: &str = "sample_id,backprop_count";

/// One row per epoch; epochs without backpropagation report `n/a` loss.
pub fn metrics_csv(m: &RunMetrics) -> String {
    let mut out = String::new();
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for e in &m.epochs {
        let loss = e
            .train_loss
            .map_or_else(|| "n/a".to_string(), |l| format!("{l:.6}"));
        writeln!(
            out,
            "{},{},{},{},{:.6}",
            e.epoch, e.retained, e.backprop_cum, loss, e.test_accuracy
        )
        .expect("string write");
    }
    out
}

pub fn histogram_csv(m: &RunMetrics) -> String {
    let mut out = String::with_capacity(12 * (m.per_sample.len() + 1));
    out.push_str(HISTOGRAM_HEADER);
    out.push('\n');
    for (id, count) in m.per_sample.iter().enumerate() {
        writeln!(out, "{id},{count}").expect("string write");
    }
    out
}
