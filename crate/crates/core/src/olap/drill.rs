use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::Result;
use crate::schema::{Cube, DetailTable, DrillRule, MeasureSemantics};

/// Whether the detail cardinality agrees with the fact cell's count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Consistency {
    Consistent,
    Mismatch { expected: i64, actual: i64 },
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DrillResult {
    pub cell_coords: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub detail_rows: Vec<Vec<String>>,
    pub cardinality: usize,
    pub consistency: Consistency,
}

/// Detail rows behind a (possibly partial) fact cell.
///
/// A rule applies when its fact dimension is named in `cell`; a detail row
/// matches when every applicable rule's extracted key equals the cell value
/// after the rule's transform.
pub fn drilldown(
    cube: &Cube,
    cell: &BTreeMap<String, String>,
    detail: &DetailTable,
    rules: &[DrillRule],
) -> Result<DrillResult> {
    let schema = cube.schema();
    for dim in cell.keys() {
        schema.require_dimension(dim)?;
    }

    let mut applicable = Vec::new();
    for rule in rules {
        let column = rule.resolve(detail)?;
        if let Some(value) = cell.get(&rule.fact_dimension) {
            applicable.push((column, rule, rule.fact_key(value)));
        }
    }

    let detail_rows: Vec<Vec<String>> = detail
        .rows()
        .iter()
        .filter(|row| {
            applicable
                .iter()
                .all(|(col, rule, key)| rule.detail_key(&row[*col]) == *key)
        })
        .cloned()
        .collect();
    let cardinality = detail_rows.len();

    let consistency = match schema.measure().semantics {
        MeasureSemantics::Sum => Consistency::NotApplicable,
        MeasureSemantics::Count => {
            let expected: i64 = cube
                .rows()
                .iter()
                .filter(|r| cell.iter().all(|(d, v)| r.get(d) == Some(v.as_str())))
                .map(|r| r.measure)
                .sum();
            let actual = cardinality as i64;
            if expected < 0 {
                Consistency::NotApplicable
            } else if expected == actual {
                Consistency::Consistent
            } else {
                Consistency::Mismatch { expected, actual }
            }
        }
    };

    Ok(DrillResult {
        cell_coords: cell.clone(),
        columns: detail.columns().to_vec(),
        detail_rows,
        cardinality,
        consistency,
    })
}
