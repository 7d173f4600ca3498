use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{DataBank, ReplicaOutcome};
use crate::fields::FieldKind;
use crate::stats::{delta0, GapPool};

pub const GAP_HISTOGRAM_BINS: usize = 40;
/// Upper edge of the δ₀ histogram; larger gaps count towards the total only.
pub const GAP_HISTOGRAM_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Mean live-particle count per recorded time.
    Survivors,
    /// Histogram of pooled δ₀ for both fields.
    Gaps,
}

/// CSV plot data for one bank. An empty bank yields the header line alone.
pub fn emit_plot_data(bank: &DataBank, kind: PlotKind) -> String {
    match kind {
        PlotKind::Survivors => survivor_curve(bank),
        PlotKind::Gaps => gap_histogram(bank),
    }
}

fn survivor_curve(bank: &DataBank) -> String {
    let mut out = String::from("t,mean_survivors,replicas\n");
    let mut sums: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for record in bank.records() {
        if let ReplicaOutcome::Completed { survivors: Some(samples), .. } = record {
            for &(t, count) in samples {
                let e = sums.entry(t).or_default();
                e.0 += count as f64;
                e.1 += 1;
            }
        }
    }
    for (t, (sum, reps)) in sums {
        let _ = writeln!(out, "{t},{},{reps}", sum / reps as f64);
    }
    out
}

fn histogram(values: &[f64]) -> Vec<f64> {
    let width = GAP_HISTOGRAM_MAX / GAP_HISTOGRAM_BINS as f64;
    let mut counts = vec![0usize; GAP_HISTOGRAM_BINS];
    for &v in values {
        let bin = (v / width).floor();
        if bin >= 0.0 && (bin as usize) < GAP_HISTOGRAM_BINS {
            counts[bin as usize] += 1;
        }
    }
    counts.into_iter().map(|c| c as f64 / values.len() as f64).collect()
}

fn gap_histogram(bank: &DataBank) -> String {
    let mut out = String::from("bin_lo,bin_hi,upper_freq,lower_freq\n");
    let upper = delta0(&GapPool::from_fields(&bank.fields(FieldKind::Upper)));
    let lower = delta0(&GapPool::from_fields(&bank.fields(FieldKind::Lower)));
    let (Ok(upper), Ok(lower)) = (upper, lower) else {
        return out;
    };
    let width = GAP_HISTOGRAM_MAX / GAP_HISTOGRAM_BINS as f64;
    for (i, (u, l)) in histogram(&upper).into_iter().zip(histogram(&lower)).enumerate() {
        let _ = writeln!(out, "{},{},{u},{l}", i as f64 * width, (i + 1) as f64 * width);
    }
    out
}
