//! In-memory star-schema OLAP engine.
//!
//! A [`Cube`] holds the fact rows of a star schema. The [`olap`] module
//! slices, dices, rolls up, drills down and pivots it; [`combinatorics`]
//! counts and enumerates every distinct pivot view a cube supports; and
//! [`ingest`] loads cubes from a manifest plus CSV files.

pub mod combinatorics;
pub mod error;
pub mod ingest;
pub mod olap;
pub mod schema;

pub use error::{Error, Result};
pub use olap::{
    chart_data, dice, drilldown, pivot, query_text, rollup, slice, ChartData, Consistency,
    DimensionFilter, DrillResult, PivotConfig, PivotReport,
};
pub use schema::{
    build_cube, grand_total, Cube, DetailTable, DimensionDef, DrillRule, Extractor, FactRow,
    MeasureDef, MeasureSemantics, StarSchema, Transform,
};
