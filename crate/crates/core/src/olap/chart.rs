use serde::{Deserialize, Serialize};

use super::PivotReport;

/// Renderer-neutral chart input: one series per column combination, points
/// aligned to `x_axis`, `None` where the report has no cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartData {
    pub x_axis: Vec<String>,
    pub series: Vec<ChartSeries>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub label: String,
    pub points: Vec<Option<i64>>,
}

pub fn chart_data(report: &PivotReport) -> ChartData {
    let cells = report.cell_map();
    let series = report
        .col_keys
        .iter()
        .zip(&report.legend_labels)
        .map(|(col, label)| ChartSeries {
            label: label.clone(),
            points: report
                .row_keys
                .iter()
                .map(|row| cells.get(&(row.clone(), col.clone())).copied())
                .collect(),
        })
        .collect();
    ChartData {
        x_axis: report.row_keys.clone(),
        series,
    }
}
