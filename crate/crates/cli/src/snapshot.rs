//! Request handling shared by the CLI and the HTTP service. Both front ends
//! go through [`Snapshot`], so identical requests produce identical payloads.

use std::collections::BTreeMap;
use std::path::Path;

use pivotcube::combinatorics::{enumerate_views, total_view_count, ViewCount};
use pivotcube::ingest::{self, LoadedDetail, LoadedStar, Manifest};
use pivotcube::{
    chart_data, dice, drilldown, grand_total, pivot, query_text, rollup, ChartData, Cube,
    DimensionFilter, DrillResult, PivotConfig, PivotReport,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::AppError;

pub type Result<T, E = AppError> = std::result::Result<T, E>;

/// A pivot request as it arrives over the wire or from CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiPivotRequest {
    pub horizontal: String,
    #[serde(default)]
    pub verticals: Vec<String>,
    #[serde(default)]
    pub filter: BTreeMap<String, Vec<String>>,
    /// Affects legend labels only.
    #[serde(default)]
    pub display_vertical_order: Option<Vec<String>>,
}

impl ApiPivotRequest {
    pub fn config(&self) -> Result<PivotConfig> {
        let config = PivotConfig::new(self.horizontal.as_str(), self.verticals.iter().cloned())?;
        match &self.display_vertical_order {
            Some(order) => Ok(config.with_display_order(order.iter().cloned())?),
            None => Ok(config),
        }
    }

    pub fn filter(&self) -> DimensionFilter {
        filter_from_map(&self.filter)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RollupRequest {
    pub keep: Vec<String>,
    #[serde(default)]
    pub filter: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrillRequest {
    pub cell: BTreeMap<String, String>,
    /// Detail table to drill into; defaults to the first one declared.
    #[serde(default)]
    pub detail: Option<String>,
}

pub fn filter_from_map(map: &BTreeMap<String, Vec<String>>) -> DimensionFilter {
    map.iter().fold(DimensionFilter::new(), |f, (dim, values)| {
        f.with(dim.as_str(), values.iter().cloned())
    })
}

/// Parses `Dim=v1,v2` clauses; repeated dimensions accumulate values.
pub fn parse_filter<S: AsRef<str>>(clauses: &[S]) -> Result<DimensionFilter> {
    let mut filter = DimensionFilter::new();
    for clause in clauses {
        let (dim, values) = split_assignment(clause.as_ref())?;
        filter = filter.with(dim, values.split(','));
    }
    Ok(filter)
}

/// Parses `Dim=value` pairs into a cell coordinate map.
pub fn parse_cell<S: AsRef<str>>(pairs: &[S]) -> Result<BTreeMap<String, String>> {
    let mut cell = BTreeMap::new();
    for pair in pairs {
        let (dim, value) = split_assignment(pair.as_ref())?;
        if cell.insert(dim.to_owned(), value.to_owned()).is_some() {
            return Err(AppError::Usage(format!("dimension `{dim}` given twice")));
        }
    }
    Ok(cell)
}

fn split_assignment(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .filter(|(dim, _)| !dim.is_empty())
        .ok_or_else(|| AppError::Usage(format!("expected DIM=VALUE, got `{text}`")))
}

/// Splits every entry on commas, so `-v A -v B` and `-v A,B` are equivalent.
pub fn split_list<S: AsRef<str>>(values: &[S]) -> Vec<String> {
    values
        .iter()
        .flat_map(|v| v.as_ref().split(','))
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn cube_payload(cube: &Cube) -> Value {
    json!({
        "dimensions": cube.schema().dimension_names().collect::<Vec<_>>(),
        "measure": cube.schema().measure().name,
        "rows": cube.rows(),
        "grand_total": grand_total(cube),
    })
}

pub fn views_payload<S: AsRef<str>>(dims: &[S], r: usize) -> Result<Value> {
    let views = enumerate_views(dims, r)?;
    let listed: Vec<Value> = views
        .iter()
        .map(|v| json!({ "horizontal": v.horizontal(), "verticals": v.verticals() }))
        .collect();
    Ok(json!({
        "n": dims.len(),
        "r": r,
        "count": listed.len(),
        "views": listed,
    }))
}

pub fn count_payload(n: u64) -> Result<ViewCount> {
    Ok(total_view_count(n)?)
}

/// `A|B,C` for horizontal A and verticals {B, C}.
pub fn view_line(view: &PivotConfig) -> String {
    format!("{}|{}", view.horizontal(), view.verticals().join(","))
}

/// Compact JSON, the one serialization both front ends emit.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("payload types serialize infallibly")
}

/// An immutable loaded manifest.
#[derive(Debug)]
pub struct Snapshot {
    pub manifest: Manifest,
    pub star: LoadedStar,
}

impl Snapshot {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let (manifest, star) = ingest::load(path)?;
        Ok(Self { manifest, star })
    }

    pub fn cube(&self) -> &Cube {
        &self.star.cube
    }

    pub fn dimension_names(&self) -> Vec<String> {
        self.cube()
            .schema()
            .dimension_names()
            .map(str::to_owned)
            .collect()
    }

    pub fn schema_payload(&self) -> Value {
        let schema = self.cube().schema();
        json!({
            "dimensions": self.dimension_names(),
            "measure": schema.measure(),
            "n": schema.n(),
            "rows": self.cube().len(),
            "details": self
                .star
                .details
                .iter()
                .map(|d| json!({ "name": d.table.name(), "rows": d.table.rows().len() }))
                .collect::<Vec<_>>(),
        })
    }

    pub fn total(&self, filter: &DimensionFilter) -> Result<Value> {
        let filtered = dice(self.cube(), filter)?;
        Ok(json!({ "filter": filter, "grand_total": grand_total(&filtered) }))
    }

    pub fn pivot(&self, request: &ApiPivotRequest) -> Result<PivotReport> {
        Ok(pivot(self.cube(), &request.config()?, &request.filter())?)
    }

    pub fn chart(&self, request: &ApiPivotRequest) -> Result<ChartData> {
        Ok(chart_data(&self.pivot(request)?))
    }

    pub fn query(&self, request: &ApiPivotRequest, table: Option<&str>) -> Result<String> {
        let table = table.map_or_else(|| self.manifest.fact_name(), str::to_owned);
        Ok(query_text(
            self.cube().schema(),
            &request.config()?,
            &request.filter(),
            &table,
        )?)
    }

    pub fn rollup(&self, request: &RollupRequest) -> Result<Cube> {
        let filtered = dice(self.cube(), &filter_from_map(&request.filter))?;
        Ok(rollup(&filtered, &request.keep)?)
    }

    pub fn detail(&self, name: Option<&str>) -> Result<&LoadedDetail> {
        match name {
            Some(name) => self
                .star
                .detail(name)
                .ok_or_else(|| AppError::UnknownDetail(name.to_owned())),
            None => self
                .star
                .details
                .first()
                .ok_or_else(|| AppError::UnknownDetail("<none declared>".to_owned())),
        }
    }

    pub fn drill(&self, request: &DrillRequest) -> Result<DrillResult> {
        let detail = self.detail(request.detail.as_deref())?;
        Ok(drilldown(
            self.cube(),
            &request.cell,
            &detail.table,
            &detail.rules,
        )?)
    }

    pub fn views(&self, r: usize) -> Result<Value> {
        views_payload(&self.dimension_names(), r)
    }
}
