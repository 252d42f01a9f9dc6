use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::{dice, DimensionFilter};
use crate::error::{Error, Result};
use crate::schema::{Cube, StarSchema};

/// One horizontal dimension plus an unordered set of vertical dimensions.
///
/// Verticals are kept sorted by name; the order the caller supplied is kept
/// separately and only affects legend labels. Equality, ordering and hashing
/// ignore the display order.
#[derive(Debug, Clone, Serialize)]
pub struct PivotConfig {
    horizontal: String,
    verticals: Vec<String>,
    display_verticals: Vec<String>,
}

impl PivotConfig {
    /// `verticals` is taken in display order.
    pub fn new<V: Into<String>>(
        horizontal: impl Into<String>,
        verticals: impl IntoIterator<Item = V>,
    ) -> Result<Self> {
        let horizontal = horizontal.into();
        let display_verticals: Vec<String> = verticals.into_iter().map(Into::into).collect();
        if horizontal.is_empty() || display_verticals.iter().any(String::is_empty) {
            return Err(Error::EmptyName);
        }
        let mut seen = BTreeSet::from([horizontal.as_str()]);
        for v in &display_verticals {
            if !seen.insert(v.as_str()) {
                return Err(Error::DuplicateDimension(v.clone()));
            }
        }
        let mut verticals = display_verticals.clone();
        verticals.sort();
        Ok(Self {
            horizontal,
            verticals,
            display_verticals,
        })
    }

    pub fn horizontal(&self) -> &str {
        &self.horizontal
    }

    /// Canonical (sorted) verticals.
    pub fn verticals(&self) -> &[String] {
        &self.verticals
    }

    pub fn display_verticals(&self) -> &[String] {
        &self.display_verticals
    }

    /// Total number of dimensions the view uses.
    pub fn r(&self) -> usize {
        1 + self.verticals.len()
    }

    /// Horizontal first, then canonical verticals.
    pub fn dimensions(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.horizontal.as_str()).chain(self.verticals.iter().map(String::as_str))
    }

    /// Same view with a different vertical display order.
    pub fn with_display_order<V: Into<String>>(
        &self,
        order: impl IntoIterator<Item = V>,
    ) -> Result<Self> {
        let reordered = Self::new(self.horizontal.clone(), order)?;
        if reordered.verticals != self.verticals {
            return Err(Error::DuplicateDimension(
                "display order must be a permutation of the verticals".into(),
            ));
        }
        Ok(reordered)
    }

    pub fn validate(&self, schema: &StarSchema) -> Result<()> {
        for dim in self.dimensions() {
            if dim == schema.measure().name {
                return Err(Error::ConfigUsesMeasure(dim.to_owned()));
            }
            schema.require_dimension(dim)?;
        }
        Ok(())
    }

    fn key(&self) -> (&str, &[String]) {
        (&self.horizontal, &self.verticals)
    }
}

impl PartialEq for PivotConfig {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for PivotConfig {}

impl PartialOrd for PivotConfig {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PivotConfig {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for PivotConfig {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

/// Vertical dimension → value. Keys iterate in canonical order, so the map's
/// own ordering is lexicographic by canonical vertical order.
pub type ColumnKey = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub row: String,
    pub col: ColumnKey,
    pub value: i64,
}

/// A materialized 2-D grid. Absent (row, column) combinations have no cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PivotReport {
    pub config: PivotConfig,
    pub row_keys: Vec<String>,
    pub col_keys: Vec<ColumnKey>,
    pub legend_labels: Vec<String>,
    /// Row-major in `row_keys` × `col_keys` order.
    pub cells: Vec<Cell>,
    pub grand_total: i64,
}

impl PivotReport {
    pub fn cell(&self, row: &str, col: &ColumnKey) -> Option<i64> {
        self.cells
            .iter()
            .find(|c| c.row == row && &c.col == col)
            .map(|c| c.value)
    }

    pub fn cell_map(&self) -> BTreeMap<(String, ColumnKey), i64> {
        self.cells
            .iter()
            .map(|c| ((c.row.clone(), c.col.clone()), c.value))
            .collect()
    }
}

/// Filters the cube, then groups by horizontal and verticals and sums the
/// measure.
pub fn pivot(cube: &Cube, config: &PivotConfig, filter: &DimensionFilter) -> Result<PivotReport> {
    let schema = cube.schema();
    config.validate(schema)?;
    let filtered = dice(cube, filter)?;

    let mut sums: BTreeMap<(String, ColumnKey), i64> = BTreeMap::new();
    for row in filtered.rows() {
        let h = row.get(&config.horizontal).unwrap_or_default().to_owned();
        let col: ColumnKey = config
            .verticals
            .iter()
            .map(|v| (v.clone(), row.get(v).unwrap_or_default().to_owned()))
            .collect();
        *sums.entry((h, col)).or_insert(0) += row.measure;
    }

    let mut row_keys: Vec<String> = sums
        .keys()
        .map(|(r, _)| r.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    row_keys.sort_by(|a, b| schema.compare_values(&config.horizontal, a, b));
    let col_keys: Vec<ColumnKey> = sums
        .keys()
        .map(|(_, c)| c.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let legend_labels = col_keys
        .iter()
        .map(|col| {
            if config.display_verticals.is_empty() {
                schema.measure().name.clone()
            } else {
                config
                    .display_verticals
                    .iter()
                    .map(|v| col[v].as_str())
                    .collect()
            }
        })
        .collect();

    let mut cells = Vec::with_capacity(sums.len());
    for row in &row_keys {
        for col in &col_keys {
            if let Some(&value) = sums.get(&(row.clone(), col.clone())) {
                cells.push(Cell {
                    row: row.clone(),
                    col: col.clone(),
                    value,
                });
            }
        }
    }

    Ok(PivotReport {
        config: config.clone(),
        row_keys,
        col_keys,
        legend_labels,
        grand_total: cells.iter().map(|c| c.value).sum(),
        cells,
    })
}
