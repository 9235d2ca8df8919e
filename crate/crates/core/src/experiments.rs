//! Sweeps behind the latency, power and redundancy figures.

use std::ops::RangeInclusive;

use crate::config::ScenarioConfig;
use crate::error::SimError;
use crate::planner::{reliability_surface, EdgeMonitor, SurfaceCell};
use crate::results::{ci_columns, format_sig9, ResultsTable};
use crate::sim::{run_batch, MetricsSummary, RunOptions, SimSetup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Baseline,
    Smart,
    D2d,
    SmartD2d,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::Smart, Variant::D2d, Variant::SmartD2d];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Smart => "smart",
            Variant::D2d => "d2d",
            Variant::SmartD2d => "smart_d2d",
        }
    }

    pub fn options(self) -> RunOptions {
        RunOptions {
            smart: matches!(self, Variant::Smart | Variant::SmartD2d),
            d2d: matches!(self, Variant::D2d | Variant::SmartD2d),
            ..RunOptions::default()
        }
    }
}

/// Batch settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepSettings {
    pub reps: usize,
    pub base_seed: u64,
    pub parallelism: usize,
}

/// Runs a batch for each TAP count. Every point reuses the same base seed,
/// so object positions are shared across points.
pub fn sweep_n_tap(
    config: &ScenarioConfig,
    n_o: usize,
    n_taps: RangeInclusive<usize>,
    options: &RunOptions,
    settings: SweepSettings,
) -> Result<Vec<(usize, MetricsSummary)>, SimError> {
    n_taps
        .map(|n_tap| {
            let mut cfg = config.clone();
            cfg.scenario.n_o = n_o as i64;
            cfg.scenario.n_tap = n_tap as i64;
            let setup = SimSetup::from_config(&cfg)?;
            let batch = run_batch(&setup, options, settings.reps, settings.base_seed, settings.parallelism)?;
            Ok((n_tap, batch.summary))
        })
        .collect()
}

fn header_comments(config: &ScenarioConfig, extra: &[String], settings: SweepSettings) -> Vec<String> {
    let mut c = extra.to_vec();
    c.push(format!("reps = {}, base_seed = {}", settings.reps, settings.base_seed));
    c.push(config.to_cfg_string());
    c
}

const LATENCY_METRICS: [&str; 4] = ["tau_o", "tau_p", "tau_a", "tau_total"];
const POWER_METRICS: [&str; 5] = ["p_tx", "p_compute", "p_storage", "p_switching", "p_total"];

/// Mean latency against TAP count, one table per variant with column
/// groups per object count (`tau_total_no50_mean`, ...).
pub fn fig4(
    config: &ScenarioConfig,
    n_o_list: &[usize],
    n_taps: RangeInclusive<usize>,
    settings: SweepSettings,
) -> Result<Vec<(Variant, ResultsTable)>, SimError> {
    Variant::ALL
        .iter()
        .map(|&variant| {
            let columns = n_o_list
                .iter()
                .flat_map(|n_o| {
                    LATENCY_METRICS
                        .iter()
                        .flat_map(move |m| ci_columns(&format!("{m}_no{n_o}")))
                })
                .collect();
            let mut table = ResultsTable::new("n_tap", columns);
            table.comments = header_comments(config, &[format!("variant = {}", variant.name())], settings);
            let sweeps = n_o_list
                .iter()
                .map(|&n_o| sweep_n_tap(config, n_o, n_taps.clone(), &variant.options(), settings))
                .collect::<Result<Vec<_>, _>>()?;
            for (row, n_tap) in n_taps.clone().enumerate() {
                let values = sweeps
                    .iter()
                    .flat_map(|sweep| {
                        let summary = &sweep[row].1;
                        LATENCY_METRICS.iter().flat_map(move |m| {
                            let s = summary.metric(m);
                            [s.mean, s.ci_low(), s.ci_high()]
                        })
                    })
                    .collect();
                table.push_row(n_tap as f64, values);
            }
            Ok((variant, table))
        })
        .collect()
}

/// Power table from an existing TAP sweep.
pub fn power_table(sweep: &[(usize, MetricsSummary)]) -> ResultsTable {
    let columns = POWER_METRICS.iter().flat_map(|m| ci_columns(m)).collect();
    let mut table = ResultsTable::new("n_tap", columns);
    for (n_tap, summary) in sweep {
        let values = POWER_METRICS
            .iter()
            .flat_map(|m| {
                let s = summary.metric(m);
                [s.mean, s.ci_low(), s.ci_high()]
            })
            .collect();
        table.push_row(*n_tap as f64, values);
    }
    table
}

/// Mean power against TAP count for the baseline variant.
pub fn fig5(
    config: &ScenarioConfig,
    n_taps: RangeInclusive<usize>,
    settings: SweepSettings,
) -> Result<ResultsTable, SimError> {
    let n_o = config.scenario.n_o.max(0) as usize;
    let sweep = sweep_n_tap(config, n_o, n_taps, &RunOptions::default(), settings)?;
    let mut table = power_table(&sweep);
    table.comments = header_comments(config, &["variant = baseline".to_string()], settings);
    Ok(table)
}

/// Channel-count surface as a table: one row per `xi_min`, one column per
/// `(ratio, n_a)` pair named `w_ratio{r}_na{n}`. Unreachable cells are `NA`.
pub fn fig6(
    ratios: &[f64],
    n_a_list: &[usize],
    xi_grid: &[f64],
    smart: Option<EdgeMonitor>,
    w_max: usize,
) -> (ResultsTable, Vec<SurfaceCell>) {
    let cells = reliability_surface(ratios, n_a_list, xi_grid, smart, w_max);
    let columns = ratios
        .iter()
        .flat_map(|r| {
            n_a_list
                .iter()
                .map(move |n| format!("w_ratio{}_na{n}", format_sig9(*r)))
        })
        .collect();
    let mut table = ResultsTable::new("xi_min", columns);
    table.comments.push(match smart {
        Some(m) => format!(
            "smart = true, prediction_accuracy = {}",
            format_sig9(m.prediction_accuracy)
        ),
        None => "smart = false".to_string(),
    });
    table.comments.push(format!("w_max = {w_max}"));
    for &xi_min in xi_grid {
        let values = ratios
            .iter()
            .flat_map(|&r| n_a_list.iter().map(move |&n| (r, n)))
            .map(|(r, n)| {
                cells
                    .iter()
                    .find(|c| c.ratio == r && c.n_a == n && c.xi_min == xi_min)
                    .and_then(|c| c.min_w)
                    .map_or(f64::NAN, |w| w as f64)
            })
            .collect();
        table.push_row(xi_min, values);
    }
    (table, cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig6_table_layout() {
        let (table, cells) = fig6(&[1.0, 6.0], &[1, 2], &[0.9, 0.999, 1.0], None, 32);
        assert_eq!(cells.len(), 12);
        assert_eq!(
            table.columns,
            ["w_ratio1_na1", "w_ratio1_na2", "w_ratio6_na1", "w_ratio6_na2"]
        );
        assert_eq!(table.column("w_ratio6_na2").unwrap()[1], 2.0);
        assert!(table.column("w_ratio6_na2").unwrap()[2].is_nan());
    }

    #[test]
    fn fig4_small_sweep() {
        let settings = SweepSettings {
            reps: 5,
            base_seed: 1,
            parallelism: 1,
        };
        let tables = fig4(&ScenarioConfig::preset(), &[10, 20], 2..=4, settings).unwrap();
        assert_eq!(tables.len(), 4);
        for (_, t) in &tables {
            assert_eq!(t.rows().len(), 3);
            assert_eq!(t.columns.len(), 2 * 4 * 3);
            assert!(t.column("tau_total_no20_mean").is_some());
        }
    }
}
