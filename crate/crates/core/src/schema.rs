//! Star-schema data model: dimensions, the measure, fact rows, the loaded
//! cube, and the detail tables reachable by drill-down.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical axis of the cube. Values are opaque strings even when they
/// look numeric.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimensionDef {
    pub name: String,
}

impl DimensionDef {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into() }
    }
}

/// How a fact row's measure relates to the detail rows underneath it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureSemantics {
    /// Each fact row tallies the detail rows it stands for.
    Count,
    Sum,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasureDef {
    pub name: String,
    pub semantics: MeasureSemantics,
}

impl MeasureDef {
    pub fn new(name: impl Into<String>, semantics: MeasureSemantics) -> Self {
        Self {
            name: name.into(),
            semantics,
        }
    }
}

/// Dimensions plus the single measure, with optional per-dimension display
/// order for category values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StarSchema {
    dimensions: Vec<DimensionDef>,
    measure: MeasureDef,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    value_order: BTreeMap<String, Vec<String>>,
}

impl StarSchema {
    pub fn new(dimensions: Vec<DimensionDef>, measure: MeasureDef) -> Result<Self> {
        if dimensions.is_empty() {
            return Err(Error::EmptySchema);
        }
        if measure.name.is_empty() {
            return Err(Error::EmptyName);
        }
        let mut seen = BTreeSet::new();
        for dim in &dimensions {
            if dim.name.is_empty() {
                return Err(Error::EmptyName);
            }
            if dim.name == measure.name || !seen.insert(dim.name.as_str()) {
                return Err(Error::DuplicateDimension(dim.name.clone()));
            }
        }
        Ok(Self {
            dimensions,
            measure,
            value_order: BTreeMap::new(),
        })
    }

    /// Declares the display order of `dim`'s values. Values not listed sort
    /// after the listed ones, lexicographically.
    pub fn with_value_order(mut self, dim: &str, order: Vec<String>) -> Result<Self> {
        self.require_dimension(dim)?;
        self.value_order.insert(dim.to_owned(), order);
        Ok(self)
    }

    pub fn dimensions(&self) -> &[DimensionDef] {
        &self.dimensions
    }

    pub fn dimension_names(&self) -> impl Iterator<Item = &str> {
        self.dimensions.iter().map(|d| d.name.as_str())
    }

    pub fn measure(&self) -> &MeasureDef {
        &self.measure
    }

    /// Number of dimensions; the measure is never counted.
    pub fn n(&self) -> usize {
        self.dimensions.len()
    }

    pub fn has_dimension(&self, name: &str) -> bool {
        self.dimensions.iter().any(|d| d.name == name)
    }

    pub(crate) fn require_dimension(&self, name: &str) -> Result<()> {
        if self.has_dimension(name) {
            Ok(())
        } else {
            Err(Error::UnknownDimension(name.to_owned()))
        }
    }

    pub fn value_order(&self, dim: &str) -> Option<&[String]> {
        self.value_order.get(dim).map(Vec::as_slice)
    }

    /// Display comparison for two values of `dim`.
    pub fn compare_values(&self, dim: &str, a: &str, b: &str) -> Ordering {
        match self.value_order.get(dim) {
            Some(order) => {
                let rank = |v: &str| order.iter().position(|o| o == v).unwrap_or(usize::MAX);
                rank(a).cmp(&rank(b)).then_with(|| a.cmp(b))
            }
            None => a.cmp(b),
        }
    }

    /// The schema restricted to `keep`, in this schema's dimension order.
    pub(crate) fn project(&self, keep: &BTreeSet<&str>) -> Self {
        let dimensions: Vec<_> = self
            .dimensions
            .iter()
            .filter(|d| keep.contains(d.name.as_str()))
            .cloned()
            .collect();
        let value_order = self
            .value_order
            .iter()
            .filter(|(k, _)| keep.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        Self {
            dimensions,
            measure: self.measure.clone(),
            value_order,
        }
    }
}

/// One row of the fact table: a value for every dimension plus the measure.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactRow {
    pub coords: BTreeMap<String, String>,
    pub measure: i64,
}

impl FactRow {
    pub fn new<K, V>(coords: impl IntoIterator<Item = (K, V)>, measure: i64) -> Self
    where
        K: Into<String>,
        V: Into<String>,
    {
        Self {
            coords: coords
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            measure,
        }
    }

    pub fn get(&self, dim: &str) -> Option<&str> {
        self.coords.get(dim).map(String::as_str)
    }
}

/// The loaded fact table. Immutable; every OLAP operation returns a new cube
/// or a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cube {
    schema: StarSchema,
    rows: Vec<FactRow>,
}

/// Validates `rows` against `schema` and materializes the cube, keeping rows
/// in load order.
pub fn build_cube(schema: StarSchema, rows: Vec<FactRow>) -> Result<Cube> {
    let mut magnitude: u64 = 0;
    for (idx, row) in rows.iter().enumerate() {
        for dim in schema.dimension_names() {
            if !row.coords.contains_key(dim) {
                return Err(Error::SchemaMismatch {
                    row: idx,
                    reason: format!("missing dimension `{dim}`"),
                });
            }
        }
        if let Some(extra) = row.coords.keys().find(|k| !schema.has_dimension(k)) {
            return Err(Error::SchemaMismatch {
                row: idx,
                reason: format!("unexpected dimension `{extra}`"),
            });
        }
        if row.measure < 0 {
            log::warn!("row {idx}: negative measure {}", row.measure);
        }
        magnitude = magnitude
            .checked_add(row.measure.unsigned_abs())
            .filter(|m| *m <= i64::MAX as u64)
            .ok_or(Error::MeasureOverflow)?;
    }
    Ok(Cube { schema, rows })
}

impl Cube {
    /// Rows derived from an already validated cube. Subsets and regroupings
    /// of a validated cube cannot exceed its absolute measure mass.
    pub(crate) fn from_validated(schema: StarSchema, rows: Vec<FactRow>) -> Self {
        Self { schema, rows }
    }

    pub fn schema(&self) -> &StarSchema {
        &self.schema
    }

    pub fn rows(&self) -> &[FactRow] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.schema.n()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_rows(self) -> Vec<FactRow> {
        self.rows
    }
}

/// Exact sum of the measure over every row.
///
/// `build_cube` bounds the absolute measure mass to `i64`, so no partial sum
/// can overflow.
pub fn grand_total(cube: &Cube) -> i64 {
    cube.rows.iter().map(|r| r.measure).sum()
}

/// Row-level detail data a fact cell can drill into.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetailTable {
    name: String,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl DetailTable {
    pub fn new(
        name: impl Into<String>,
        columns: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self> {
        let name = name.into();
        if let Some((row, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != columns.len())
        {
            return Err(Error::DetailArity {
                table: name,
                row,
                expected: columns.len(),
                found: r.len(),
            });
        }
        Ok(Self {
            name,
            columns,
            rows,
        })
    }

    pub fn empty(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self {
            name: name.into(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn column_index(&self, column: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == column)
            .ok_or_else(|| Error::UnknownDetailColumn {
                table: self.name.clone(),
                column: column.to_owned(),
            })
    }
}

/// How a join key is read out of a detail row.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extractor {
    /// The whole column value.
    Column(String),
    /// `len` characters starting at the 1-based character `start`. Like SQL
    /// `substr`, a range running past the end yields the shorter remainder.
    Substring {
        column: String,
        start: usize,
        len: usize,
    },
}

impl Extractor {
    pub fn column(&self) -> &str {
        match self {
            Extractor::Column(c) | Extractor::Substring { column: c, .. } => c,
        }
    }

    fn apply(&self, value: &str) -> String {
        match self {
            Extractor::Column(_) => value.to_owned(),
            Extractor::Substring { start, len, .. } => {
                value.chars().skip(start - 1).take(*len).collect()
            }
        }
    }
}

/// Rewrite applied to the fact cell's value before it is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// Keep the last `k` characters.
    TakeRight(usize),
}

impl Transform {
    pub fn apply(&self, value: &str) -> String {
        match *self {
            Transform::TakeRight(k) => {
                let count = value.chars().count();
                value.chars().skip(count.saturating_sub(k)).collect()
            }
        }
    }
}

/// Declarative join between one fact dimension and a detail table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DrillRule {
    pub fact_dimension: String,
    pub extractor: Extractor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Transform>,
}

impl DrillRule {
    pub fn new(fact_dimension: impl Into<String>, extractor: Extractor) -> Self {
        Self {
            fact_dimension: fact_dimension.into(),
            extractor,
            transform: None,
        }
    }

    pub fn with_transform(mut self, transform: Transform) -> Self {
        self.transform = Some(transform);
        self
    }

    /// Checks the rule against `detail` and returns the column index it reads.
    pub fn resolve(&self, detail: &DetailTable) -> Result<usize> {
        if let Extractor::Substring { start, len, .. } = self.extractor {
            if start == 0 || len == 0 {
                return Err(Error::BadSubstringBounds { start, len });
            }
        }
        if self.transform == Some(Transform::TakeRight(0)) {
            return Err(Error::BadTransform);
        }
        detail.column_index(self.extractor.column())
    }

    /// Key extracted from a detail column value.
    pub fn detail_key(&self, value: &str) -> String {
        self.extractor.apply(value)
    }

    /// Key derived from the fact cell's value.
    pub fn fact_key(&self, value: &str) -> String {
        match &self.transform {
            Some(t) => t.apply(value),
            None => value.to_owned(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_schema() -> StarSchema {
        StarSchema::new(
            ["Year", "Deg", "SP", "Gen"]
                .into_iter()
                .map(DimensionDef::new)
                .collect(),
            MeasureDef::new("Amn", MeasureSemantics::Count),
        )
        .unwrap()
    }

    fn table1_rows() -> Vec<FactRow> {
        let raw = [
            ("2000", "5", "11", "p", 11),
            ("2000", "5", "11", "w", 22),
            ("2000", "3", "11", "p", 12),
            ("2000", "3", "11", "w", 13),
            ("2000", "5", "22", "p", 10),
            ("2001", "5", "11", "w", 33),
            ("2001", "5", "11", "p", 44),
            ("2001", "3", "11", "w", 14),
            ("2001", "3", "11", "p", 15),
            ("2002", "5", "11", "p", 55),
            ("2002", "5", "11", "w", 66),
            ("2002", "3", "11", "p", 16),
            ("2002", "3", "11", "w", 17),
        ];
        raw.iter()
            .map(|&(y, d, s, g, m)| {
                FactRow::new([("Year", y), ("Deg", d), ("SP", s), ("Gen", g)], m)
            })
            .collect()
    }

    #[test]
    fn builds_table1_cube() {
        let cube = build_cube(table1_schema(), table1_rows()).unwrap();
        assert_eq!(cube.n(), 4);
        assert_eq!(cube.len(), 13);
        assert_eq!(grand_total(&cube), 328);
        assert_eq!(cube.rows()[4].measure, 10);
        assert!(cube.rows().iter().all(|r| r.coords.len() == cube.n()));
    }

    #[test]
    fn minimal_schema() {
        let schema = StarSchema::new(
            vec![DimensionDef::new("Year")],
            MeasureDef::new("Amn", MeasureSemantics::Count),
        )
        .unwrap();
        let cube = build_cube(schema, vec![FactRow::new([("Year", "2000")], 5)]).unwrap();
        assert_eq!(cube.n(), 1);
        assert_eq!(grand_total(&cube), 5);
    }

    #[test]
    fn missing_dimension_is_mismatch() {
        let mut rows = table1_rows();
        rows[6].coords.remove("Gen");
        let err = build_cube(table1_schema(), rows).unwrap_err();
        assert!(matches!(err, Error::SchemaMismatch { row: 6, .. }), "{err}");
    }

    #[test]
    fn extra_dimension_is_mismatch() {
        let mut rows = table1_rows();
        rows[0].coords.insert("Campus".into(), "x".into());
        assert!(matches!(
            build_cube(table1_schema(), rows),
            Err(Error::SchemaMismatch { row: 0, .. })
        ));
    }

    #[test]
    fn schema_rejections() {
        let measure = MeasureDef::new("Amn", MeasureSemantics::Sum);
        assert_eq!(
            StarSchema::new(vec![], measure.clone()),
            Err(Error::EmptySchema)
        );
        assert_eq!(
            StarSchema::new(
                vec![DimensionDef::new("A"), DimensionDef::new("A")],
                measure.clone()
            ),
            Err(Error::DuplicateDimension("A".into()))
        );
        assert_eq!(
            StarSchema::new(vec![DimensionDef::new("Amn")], measure.clone()),
            Err(Error::DuplicateDimension("Amn".into()))
        );
        assert_eq!(
            StarSchema::new(vec![DimensionDef::new("")], measure),
            Err(Error::EmptyName)
        );
    }

    #[test]
    fn grand_total_edge_cases() {
        let schema = StarSchema::new(
            vec![DimensionDef::new("A")],
            MeasureDef::new("m", MeasureSemantics::Sum),
        )
        .unwrap();
        let empty = build_cube(schema.clone(), vec![]).unwrap();
        assert_eq!(grand_total(&empty), 0);
        let cancel = build_cube(
            schema,
            vec![
                FactRow::new([("A", "x")], 5),
                FactRow::new([("A", "y")], -5),
            ],
        )
        .unwrap();
        assert_eq!(grand_total(&cancel), 0);
    }

    #[test]
    fn overflow_is_rejected() {
        let schema = StarSchema::new(
            vec![DimensionDef::new("A")],
            MeasureDef::new("m", MeasureSemantics::Sum),
        )
        .unwrap();
        let rows = vec![
            FactRow::new([("A", "x")], i64::MAX),
            FactRow::new([("A", "y")], 1),
        ];
        assert_eq!(
            build_cube(schema.clone(), rows),
            Err(Error::MeasureOverflow)
        );
        let rows = vec![
            FactRow::new([("A", "x")], i64::MAX),
            FactRow::new([("A", "y")], -1),
        ];
        // Mixed signs still bound every subset sum, so this must fail too.
        assert_eq!(build_cube(schema, rows), Err(Error::MeasureOverflow));
    }

    #[test]
    fn value_order_ranks_declared_values_first() {
        let schema = table1_schema()
            .with_value_order("Deg", vec!["5".into(), "3".into()])
            .unwrap();
        assert_eq!(schema.compare_values("Deg", "5", "3"), Ordering::Less);
        assert_eq!(schema.compare_values("Deg", "4", "3"), Ordering::Greater);
        assert_eq!(schema.compare_values("Deg", "4", "6"), Ordering::Less);
        assert_eq!(
            schema.compare_values("Year", "2001", "2000"),
            Ordering::Greater
        );
        assert!(table1_schema().with_value_order("Nope", vec![]).is_err());
    }

    #[test]
    fn extractors_follow_sql_substr() {
        let nim = "0011500001";
        let sub = |start, len| Extractor::Substring {
            column: "Nim".into(),
            start,
            len,
        };
        assert_eq!(sub(1, 2).apply(nim), "00");
        assert_eq!(sub(3, 2).apply(nim), "11");
        assert_eq!(sub(5, 1).apply(nim), "5");
        assert_eq!(sub(9, 5).apply(nim), "01");
        assert_eq!(sub(20, 2).apply(nim), "");
        assert_eq!(Transform::TakeRight(2).apply("2000"), "00");
        assert_eq!(Transform::TakeRight(9).apply("2000"), "2000");
    }

    #[test]
    fn drill_rule_resolution() {
        let detail = DetailTable::new(
            "master",
            vec!["Nim".into(), "Name".into()],
            vec![vec!["0011500001".into(), "Joni".into()]],
        )
        .unwrap();
        let ok = DrillRule::new(
            "Year",
            Extractor::Substring {
                column: "Nim".into(),
                start: 1,
                len: 2,
            },
        );
        assert_eq!(ok.resolve(&detail), Ok(0));
        let missing = DrillRule::new("Gen", Extractor::Column("Gend".into()));
        assert!(matches!(
            missing.resolve(&detail),
            Err(Error::UnknownDetailColumn { .. })
        ));
        let zero = DrillRule::new(
            "SP",
            Extractor::Substring {
                column: "Nim".into(),
                start: 0,
                len: 2,
            },
        );
        assert_eq!(
            zero.resolve(&detail),
            Err(Error::BadSubstringBounds { start: 0, len: 2 })
        );
    }

    #[test]
    fn detail_arity_checked() {
        let err = DetailTable::new("t", vec!["a".into(), "b".into()], vec![vec!["1".into()]])
            .unwrap_err();
        assert!(matches!(err, Error::DetailArity { row: 0, .. }));
    }
}
