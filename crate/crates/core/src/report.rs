//! Summary statistics and result files.
//!
//! Emitted files are byte-stable: rows follow deterministic orders, floats
//! print in shortest round-trip form, and nothing depends on wall-clock
//! time, so identical runs produce identical bytes.

use std::path::Path;

use serde::Serialize;

use crate::engine::{BatchRow, Mode, RunResult, TraceKind};
use crate::{Error, Result};

/// Linear-interpolation quantile (type 7) of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Linear-interpolation quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    quantile_sorted(&sorted, q)
}

/// Five-number box summary with 1.5·IQR whiskers.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    /// Smallest sample within 1.5·IQR below q1.
    pub whisker_low: f64,
    /// Largest sample within 1.5·IQR above q3.
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn from_samples(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let q1 = quantile_sorted(&sorted, 0.25);
        let median = quantile_sorted(&sorted, 0.5);
        let q3 = quantile_sorted(&sorted, 0.75);
        let reach = 1.5 * (q3 - q1);
        let lo_fence = q1 - reach;
        let hi_fence = q3 + reach;
        let whisker_low = sorted
            .iter()
            .copied()
            .find(|&v| v >= lo_fence)
            .unwrap_or(q1);
        let whisker_high = sorted
            .iter()
            .rev()
            .copied()
            .find(|&v| v <= hi_fence)
            .unwrap_or(q3);
        let outliers = sorted
            .iter()
            .copied()
            .filter(|&v| v < lo_fence || v > hi_fence)
            .collect();
        Some(Self {
            median,
            q1,
            q3,
            whisker_low,
            whisker_high,
            outliers,
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Fraction of offered traffic that was not served; 0 when nothing was
/// offered.
pub fn drop_ratio(offered_bits: f64, served_bits: f64) -> f64 {
    if offered_bits > 0.0 {
        (1.0 - served_bits / offered_bits).max(0.0)
    } else {
        0.0
    }
}

/// Earliest grid time from which the median stays above `p_th` for
/// `persist_s` seconds (clipped at the end of the series), or None.
pub fn convergence_time(grid_s: &[f64], medians: &[f64], p_th: f64, persist_s: f64) -> Option<f64> {
    assert_eq!(grid_s.len(), medians.len());
    let n = grid_s.len();
    if n == 0 {
        return None;
    }
    let end = grid_s[n - 1];
    // next_bad[i]: earliest grid time at or after grid[i] whose median is
    // at or below the threshold.
    let mut next_bad = vec![f64::INFINITY; n];
    let mut nb = f64::INFINITY;
    for i in (0..n).rev() {
        if medians[i] <= p_th {
            nb = grid_s[i];
        }
        next_bad[i] = nb;
    }
    for i in 0..n {
        let horizon = (grid_s[i] + persist_s).min(end);
        if next_bad[i] > horizon {
            return Some(grid_s[i]);
        }
    }
    None
}

/// Empirical CDF of convergence times. Runs that never converged inflate
/// the denominator but contribute no step, so the curve tops out below 1.
pub fn convergence_cdf(times: &[Option<f64>]) -> Vec<(f64, f64)> {
    let n = times.len();
    if n == 0 {
        return Vec::new();
    }
    let mut converged: Vec<f64> = times.iter().filter_map(|t| *t).collect();
    converged.sort_unstable_by(f64::total_cmp);
    let mut points = Vec::with_capacity(converged.len());
    let mut count = 0usize;
    let mut i = 0;
    while i < converged.len() {
        let t = converged[i];
        while i < converged.len() && converged[i] == t {
            count += 1;
            i += 1;
        }
        points.push((t, count as f64 / n as f64));
    }
    points
}

#[derive(Serialize)]
struct RunSummary<'a> {
    mode: &'a str,
    t_sim_s: f64,
    mean_satisfaction: f64,
    agg_throughput_mbps: f64,
    drop_ratio: f64,
    convergence_time_s: Option<f64>,
    offered_bits: f64,
    served_bits: f64,
    events_processed: u64,
    initial_channels: &'a [u16],
    final_channels: &'a [u16],
}

fn node_label(kind: TraceKind, node: usize) -> String {
    match kind {
        TraceKind::Daps => format!("sta{node}"),
        TraceKind::Dca | TraceKind::Forced => format!("ap{node}"),
    }
}

/// Writes `time_series.csv`, `agent_trace.csv`, and `summary.json` for one
/// run into `dir`.
pub fn emit_run(dir: impl AsRef<Path>, result: &RunResult) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("time_series.csv"))?;
    w.write_record(["time_s", "node", "metric", "value"])?;
    for (gi, &t) in result.grid_s.iter().enumerate() {
        let ts = t.to_string();
        for (a, series) in result.ap_load.iter().enumerate() {
            w.write_record([&ts, &format!("ap{a}"), "load", &series[gi].to_string()])?;
        }
        for (s, series) in result.sta_sat_trail.iter().enumerate() {
            w.write_record([
                &ts,
                &format!("sta{s}"),
                "sat_trail",
                &series[gi].to_string(),
            ])?;
        }
        w.write_record([
            &ts,
            "net",
            "sat_median",
            &result.sat_median_trail[gi].to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("agent_trace.csv"))?;
    w.write_record(["time_s", "kind", "node", "from", "to"])?;
    for row in &result.agent_trace {
        w.write_record([
            row.time_s.to_string(),
            row.kind.as_str().to_string(),
            node_label(row.kind, row.node),
            row.from.to_string(),
            row.to.to_string(),
        ])?;
    }
    w.flush()?;

    let summary = RunSummary {
        mode: result.mode.as_str(),
        t_sim_s: result.t_sim_s,
        mean_satisfaction: result.mean_satisfaction,
        agg_throughput_mbps: result.agg_throughput_bps / 1e6,
        drop_ratio: result.drop_ratio,
        convergence_time_s: result.convergence_time_s,
        offered_bits: result.offered_bits,
        served_bits: result.served_bits,
        events_processed: result.events_processed,
        initial_channels: &result.initial_channels,
        final_channels: &result.final_channels,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

/// Writes `batch_summary.csv` into `dir`: one row per (scenario, mode) run.
pub fn emit_batch(dir: impl AsRef<Path>, rows: &[BatchRow]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("batch_summary.csv"))?;
    w.write_record([
        "scenario_seed",
        "mode",
        "mean_satisfaction",
        "agg_throughput_mbps",
        "drop_ratio",
        "convergence_time_s",
    ])?;
    for row in rows {
        w.write_record([
            row.scenario_seed.to_string(),
            row.mode.as_str().to_string(),
            row.mean_satisfaction.to_string(),
            row.agg_throughput_mbps.to_string(),
            row.drop_ratio.to_string(),
            row.convergence_time_s
                .map_or(String::new(), |t| t.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows previously written by [`emit_batch`].
pub fn read_batch(path: impl AsRef<Path>) -> Result<Vec<BatchRow>> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let expected = [
        "scenario_seed",
        "mode",
        "mean_satisfaction",
        "agg_throughput_mbps",
        "drop_ratio",
        "convergence_time_s",
    ];
    if reader.headers()?.iter().ne(expected) {
        return Err(Error::Config(format!(
            "unexpected batch summary header in {}",
            path.as_ref().display()
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let number = |i: usize| -> Result<f64> {
            record[i].parse().map_err(|e| {
                Error::Config(format!("bad number {:?} in batch summary: {e}", &record[i]))
            })
        };
        rows.push(BatchRow {
            scenario_seed: record[0].parse().map_err(|e| {
                Error::Config(format!("bad seed {:?} in batch summary: {e}", &record[0]))
            })?,
            mode: record[1].parse()?,
            mean_satisfaction: number(2)?,
            agg_throughput_mbps: number(3)?,
            drop_ratio: number(4)?,
            convergence_time_s: if record[5].is_empty() {
                None
            } else {
                Some(number(5)?)
            },
        });
    }
    Ok(rows)
}

/// Aggregates batch rows into `box_stats.csv` and `convergence_cdf.csv`.
pub fn emit_aggregate(dir: impl AsRef<Path>, rows: &[BatchRow]) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;

    let mut w = csv::Writer::from_path(dir.join("box_stats.csv"))?;
    w.write_record([
        "mode",
        "metric",
        "n",
        "median",
        "q1",
        "q3",
        "whisker_low",
        "whisker_high",
        "n_outliers",
    ])?;
    for mode in [Mode::Static, Mode::Adaptive] {
        let of_mode: Vec<&BatchRow> = rows.iter().filter(|r| r.mode == mode).collect();
        if of_mode.is_empty() {
            continue;
        }
        let metrics: [(&str, Vec<f64>); 3] = [
            (
                "mean_satisfaction",
                of_mode.iter().map(|r| r.mean_satisfaction).collect(),
            ),
            (
                "agg_throughput_mbps",
                of_mode.iter().map(|r| r.agg_throughput_mbps).collect(),
            ),
            ("drop_ratio", of_mode.iter().map(|r| r.drop_ratio).collect()),
        ];
        for (name, values) in metrics {
            let stats = BoxStats::from_samples(&values).expect("non-empty by construction");
            w.write_record([
                mode.as_str().to_string(),
                name.to_string(),
                values.len().to_string(),
                stats.median.to_string(),
                stats.q1.to_string(),
                stats.q3.to_string(),
                stats.whisker_low.to_string(),
                stats.whisker_high.to_string(),
                stats.outliers.len().to_string(),
            ])?;
        }
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("convergence_cdf.csv"))?;
    w.write_record(["mode", "time_s", "fraction"])?;
    for mode in [Mode::Static, Mode::Adaptive] {
        let times: Vec<Option<f64>> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.convergence_time_s)
            .collect();
        for (t, frac) in convergence_cdf(&times) {
            w.write_record([mode.as_str().to_string(), t.to_string(), frac.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_of_one_to_five() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.75), 4.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
    }

    #[test]
    fn quantile_interpolates_between_order_statistics() {
        let v = [10.0, 20.0, 30.0, 40.0];
        // h = 3·0.5 = 1.5 → halfway between 20 and 30.
        assert!((quantile(&v, 0.5) - 25.0).abs() < 1e-12);
        assert!((quantile(&v, 0.25) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_is_order_invariant() {
        let sorted = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let shuffled = [4.0, 1.0, 7.0, 3.0, 6.0, 2.0, 5.0];
        for q in [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0] {
            assert_eq!(quantile(&sorted, q), quantile(&shuffled, q));
        }
    }

    #[test]
    fn box_stats_flag_far_points_as_outliers() {
        let mut v: Vec<f64> = (1..=11).map(|x| x as f64).collect();
        v.push(100.0);
        let stats = BoxStats::from_samples(&v).unwrap();
        assert!(stats.outliers.contains(&100.0));
        assert!(stats.whisker_high <= 11.0);
        assert!(stats.whisker_low >= 1.0);
        assert!(stats.iqr() > 0.0);
        assert!(BoxStats::from_samples(&[]).is_none());
    }

    #[test]
    fn drop_ratio_matches_the_saturated_pair() {
        // Two saturated co-channel APs at effective load 1.3 serve 1/1.3 of
        // what stations offer.
        let offered = 1.3e9;
        let served = 1e9;
        assert!((drop_ratio(offered, served) - 0.230_769_230_769_230_7).abs() < 1e-12);
        assert_eq!(drop_ratio(0.0, 0.0), 0.0);
        assert_eq!(drop_ratio(1e9, 1e9), 0.0);
    }

    #[test]
    fn convergence_requires_persistence() {
        let grid: Vec<f64> = (0..=120).map(|i| i as f64 * 60.0).collect();
        // Median pops above the threshold at 30 min but dips again at 60 min;
        // it holds from 70 min on.
        let medians: Vec<f64> = grid
            .iter()
            .map(|&t| {
                if t >= 4200.0 {
                    0.95
                } else if (1800.0..3600.0).contains(&t) {
                    0.9
                } else {
                    0.5
                }
            })
            .collect();
        let t = convergence_time(&grid, &medians, 0.85, 3600.0).unwrap();
        assert_eq!(t, 4200.0);
    }

    #[test]
    fn convergence_window_is_clipped_at_the_series_end() {
        // Only 20 minutes of data, all above threshold: converged at t=0.
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 60.0).collect();
        let medians = vec![0.99; grid.len()];
        assert_eq!(convergence_time(&grid, &medians, 0.85, 3600.0), Some(0.0));
    }

    #[test]
    fn convergence_never_reached_is_none() {
        // Dips every half hour (and a bad final sample) leave no grid point
        // whose clipped persistence horizon is dip-free.
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 60.0).collect();
        let medians: Vec<f64> = (0..=100)
            .map(|i| if i % 30 == 29 || i == 100 { 0.5 } else { 0.99 })
            .collect();
        assert_eq!(convergence_time(&grid, &medians, 0.85, 3600.0), None);
        // A threshold-equal point does not count as above.
        let medians = vec![0.85; grid.len()];
        assert_eq!(convergence_time(&grid, &medians, 0.85, 3600.0), None);
    }

    #[test]
    fn cdf_counts_non_converged_runs_in_the_denominator() {
        let times = [Some(100.0), Some(50.0), None, Some(100.0)];
        let cdf = convergence_cdf(&times);
        assert_eq!(cdf, vec![(50.0, 0.25), (100.0, 0.75)]);
        assert!(convergence_cdf(&[]).is_empty());
    }

    #[test]
    fn batch_summary_round_trips_through_csv() {
        let rows = vec![
            BatchRow {
                scenario_seed: 7,
                mode: Mode::Static,
                mean_satisfaction: 0.8125,
                agg_throughput_mbps: 31.5,
                drop_ratio: 0.0625,
                convergence_time_s: None,
            },
            BatchRow {
                scenario_seed: 7,
                mode: Mode::Adaptive,
                mean_satisfaction: 0.96875,
                agg_throughput_mbps: 33.25,
                drop_ratio: 0.015625,
                convergence_time_s: Some(5400.0),
            },
        ];
        let dir = std::env::temp_dir().join("airmab-report-roundtrip");
        emit_batch(&dir, &rows).unwrap();
        let back = read_batch(dir.join("batch_summary.csv")).unwrap();
        assert_eq!(back, rows);
    }
}
