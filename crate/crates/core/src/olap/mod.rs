//! Slice, dice, roll-up and drill-down over a [`Cube`], plus pivot reports
//! and canonical query text.

mod chart;
mod drill;
mod pivot;
mod query;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{Cube, FactRow, StarSchema};

pub use chart::{chart_data, ChartData, ChartSeries};
pub use drill::{drilldown, Consistency, DrillResult};
pub use pivot::{pivot, Cell, ColumnKey, PivotConfig, PivotReport};
pub use query::query_text;

/// Dice predicate: every clause must hold, and a clause holds when the row's
/// value is one of the allowed values.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimensionFilter {
    clauses: BTreeMap<String, BTreeSet<String>>,
}

impl DimensionFilter {
    pub fn new() -> Self {
        Self::default()
    }

    /// The slice predicate `dim = value`.
    pub fn single(dim: impl Into<String>, value: impl Into<String>) -> Self {
        Self::new().with(dim, [value])
    }

    /// Adds allowed values for `dim`, merging with any existing clause.
    pub fn with<V: Into<String>>(
        mut self,
        dim: impl Into<String>,
        values: impl IntoIterator<Item = V>,
    ) -> Self {
        self.clauses
            .entry(dim.into())
            .or_default()
            .extend(values.into_iter().map(Into::into));
        self
    }

    pub fn clauses(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn validate(&self, schema: &StarSchema) -> Result<()> {
        for (dim, values) in &self.clauses {
            schema.require_dimension(dim)?;
            if values.is_empty() {
                return Err(Error::EmptyFilterClause(dim.clone()));
            }
        }
        Ok(())
    }

    pub fn matches(&self, row: &FactRow) -> bool {
        self.clauses
            .iter()
            .all(|(dim, values)| row.get(dim).is_some_and(|v| values.contains(v)))
    }
}

/// Rows whose `dim` coordinate equals `value`.
pub fn slice(cube: &Cube, dim: &str, value: &str) -> Result<Cube> {
    dice(cube, &DimensionFilter::single(dim, value))
}

/// Rows satisfying every clause of `filter`.
pub fn dice(cube: &Cube, filter: &DimensionFilter) -> Result<Cube> {
    filter.validate(cube.schema())?;
    let rows = cube
        .rows()
        .iter()
        .filter(|r| filter.matches(r))
        .cloned()
        .collect();
    Ok(Cube::from_validated(cube.schema().clone(), rows))
}

/// Removes every dimension not in `keep`, summing the measure over rows that
/// collapse onto the same kept coordinates. Groups come out in order of
/// first appearance.
pub fn rollup<S: AsRef<str>>(cube: &Cube, keep: &[S]) -> Result<Cube> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let schema = cube.schema();
    let mut kept = BTreeSet::new();
    for dim in keep {
        let dim = dim.as_ref();
        schema.require_dimension(dim)?;
        kept.insert(dim);
    }
    let projected = schema.project(&kept);

    let mut index: HashMap<BTreeMap<String, String>, usize> = HashMap::new();
    let mut rows: Vec<FactRow> = Vec::new();
    for row in cube.rows() {
        let coords: BTreeMap<String, String> = row
            .coords
            .iter()
            .filter(|(k, _)| kept.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        match index.get(&coords) {
            Some(&i) => rows[i].measure += row.measure,
            None => {
                index.insert(coords.clone(), rows.len());
                rows.push(FactRow {
                    coords,
                    measure: row.measure,
                });
            }
        }
    }
    Ok(Cube::from_validated(projected, rows))
}
