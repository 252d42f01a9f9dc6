//! Loading a star schema from a JSON manifest plus header-first CSV files.
//!
//! ```json
//! {
//!   "fact": { "file": "fact.csv", "dimensions": ["Year", "Gen"],
//!             "measure": "Amn", "semantics": "count" },
//!   "details": [{ "name": "master", "file": "master.csv",
//!                 "rules": [{ "dimension": "Year",
//!                             "extractor": { "substring": ["Nim", 1, 2] },
//!                             "transform": { "take_right": 2 } }] }],
//!   "display": { "order": { "Gen": ["p", "w"] } }
//! }
//! ```
//!
//! Relative file paths resolve against the manifest's directory.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::error::Error;
use crate::schema::{
    build_cube, Cube, DetailTable, DimensionDef, DrillRule, Extractor, FactRow, MeasureDef,
    MeasureSemantics, StarSchema, Transform,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("manifest parse error: {0}")]
    Parse(String),

    #[error("manifest is missing `{0}`")]
    MissingField(&'static str),

    #[error("duplicate dimension `{0}`")]
    DuplicateDimension(String),

    #[error("duplicate detail table `{0}`")]
    DuplicateDetail(String),

    #[error("{file}: header mismatch: {reason}")]
    HeaderMismatch { file: String, reason: String },

    #[error("line {line}: measure `{value}` is not an integer")]
    BadMeasure { line: u64, value: String },

    #[error("{0}: fact file has no data rows")]
    EmptyFactFile(String),

    #[error("{file} line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        file: String,
        line: u64,
        expected: u64,
        found: u64,
    },

    #[error("{file}: {message}")]
    Csv { file: String, message: String },

    #[error(transparent)]
    Schema(#[from] Error),
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactSpec {
    pub file: PathBuf,
    pub dimensions: Vec<String>,
    pub measure: String,
    pub semantics: MeasureSemantics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetailSpec {
    pub name: String,
    pub file: PathBuf,
    pub rules: Vec<DrillRule>,
}

/// A validated manifest with file paths already resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub path: PathBuf,
    pub fact: FactSpec,
    pub details: Vec<DetailSpec>,
    pub display_order: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    fact: Option<RawFact>,
    #[serde(default)]
    details: Vec<RawDetail>,
    display: Option<RawDisplay>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFact {
    file: Option<String>,
    dimensions: Option<Vec<String>>,
    measure: Option<String>,
    semantics: Option<MeasureSemantics>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetail {
    name: Option<String>,
    file: Option<String>,
    #[serde(default)]
    rules: Vec<RawRule>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    dimension: Option<String>,
    extractor: Option<RawExtractor>,
    transform: Option<RawTransform>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawExtractor {
    Column(String),
    Substring((String, usize, usize)),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawTransform {
    TakeRight(usize),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisplay {
    #[serde(default)]
    order: BTreeMap<String, Vec<String>>,
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base, path)
}

/// Parses manifest text; relative paths resolve against `base`.
pub fn parse_manifest(text: &str, base: &Path, origin: &Path) -> Result<Manifest> {
    let raw: RawManifest =
        serde_json::from_str(text).map_err(|e| IngestError::Parse(e.to_string()))?;

    let fact = raw.fact.ok_or(IngestError::MissingField("fact"))?;
    let file = fact.file.ok_or(IngestError::MissingField("fact.file"))?;
    let dimensions = fact
        .dimensions
        .filter(|d| !d.is_empty())
        .ok_or(IngestError::MissingField("fact.dimensions"))?;
    let measure = fact
        .measure
        .ok_or(IngestError::MissingField("fact.measure"))?;
    let semantics = fact
        .semantics
        .ok_or(IngestError::MissingField("fact.semantics"))?;

    let mut seen = BTreeSet::new();
    for dim in &dimensions {
        if *dim == measure || !seen.insert(dim.as_str()) {
            return Err(IngestError::DuplicateDimension(dim.clone()));
        }
    }
    let known = |dim: &str| -> Result<()> {
        if seen.contains(dim) {
            Ok(())
        } else {
            Err(Error::UnknownDimension(dim.to_owned()).into())
        }
    };

    let mut details = Vec::with_capacity(raw.details.len());
    let mut detail_names = BTreeSet::new();
    for d in raw.details {
        let name = d.name.ok_or(IngestError::MissingField("details[].name"))?;
        let file = d.file.ok_or(IngestError::MissingField("details[].file"))?;
        if !detail_names.insert(name.clone()) {
            return Err(IngestError::DuplicateDetail(name));
        }
        let mut rules = Vec::with_capacity(d.rules.len());
        for r in d.rules {
            let dimension = r
                .dimension
                .ok_or(IngestError::MissingField("details[].rules[].dimension"))?;
            known(&dimension)?;
            let extractor = match r
                .extractor
                .ok_or(IngestError::MissingField("details[].rules[].extractor"))?
            {
                RawExtractor::Column(c) => Extractor::Column(c),
                RawExtractor::Substring((column, start, len)) => {
                    if start == 0 || len == 0 {
                        return Err(Error::BadSubstringBounds { start, len }.into());
                    }
                    Extractor::Substring { column, start, len }
                }
            };
            let mut rule = DrillRule::new(dimension, extractor);
            if let Some(RawTransform::TakeRight(k)) = r.transform {
                if k == 0 {
                    return Err(Error::BadTransform.into());
                }
                rule = rule.with_transform(Transform::TakeRight(k));
            }
            rules.push(rule);
        }
        details.push(DetailSpec {
            name,
            file: base.join(file),
            rules,
        });
    }

    let display_order = raw.display.map(|d| d.order).unwrap_or_default();
    for dim in display_order.keys() {
        known(dim)?;
    }

    Ok(Manifest {
        path: origin.to_owned(),
        fact: FactSpec {
            file: base.join(file),
            dimensions,
            measure,
            semantics,
        },
        details,
        display_order,
    })
}

impl Manifest {
    pub fn schema(&self) -> Result<StarSchema> {
        let mut schema = StarSchema::new(
            self.fact
                .dimensions
                .iter()
                .map(|d| DimensionDef::new(d.as_str()))
                .collect(),
            MeasureDef::new(self.fact.measure.as_str(), self.fact.semantics),
        )?;
        for (dim, order) in &self.display_order {
            schema = schema.with_value_order(dim, order.clone())?;
        }
        Ok(schema)
    }

    /// Fact table name used in generated query text: the fact file's stem.
    pub fn fact_name(&self) -> String {
        self.fact
            .file
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "fact".to_owned())
    }
}

/// A detail table together with the rules that join it to the fact table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedDetail {
    pub table: DetailTable,
    pub rules: Vec<DrillRule>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedStar {
    pub cube: Cube,
    pub details: Vec<LoadedDetail>,
}

impl LoadedStar {
    pub fn detail(&self, name: &str) -> Option<&LoadedDetail> {
        self.details.iter().find(|d| d.table.name() == name)
    }
}

pub fn load_cube(manifest: &Manifest) -> Result<LoadedStar> {
    let schema = manifest.schema()?;
    let fact_file = open(&manifest.fact.file)?;
    let cube = read_fact_csv(fact_file, schema, &manifest.fact.file.display().to_string())?;

    let mut details = Vec::with_capacity(manifest.details.len());
    for spec in &manifest.details {
        let label = spec.file.display().to_string();
        let table = read_detail_csv(open(&spec.file)?, &spec.name, &label)?;
        for rule in &spec.rules {
            rule.resolve(&table).map_err(|e| match e {
                Error::UnknownDetailColumn { column, .. } => IngestError::HeaderMismatch {
                    file: label.clone(),
                    reason: format!("drill rule references missing column `{column}`"),
                },
                other => other.into(),
            })?;
        }
        details.push(LoadedDetail {
            table,
            rules: spec.rules.clone(),
        });
    }
    Ok(LoadedStar { cube, details })
}

pub fn load(path: impl AsRef<Path>) -> Result<(Manifest, LoadedStar)> {
    let manifest = load_manifest(path)?;
    let star = load_cube(&manifest)?;
    Ok((manifest, star))
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })
}

fn csv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader)
}

fn csv_error(err: csv::Error, file: &str) -> IngestError {
    match err.kind() {
        csv::ErrorKind::UnequalLengths {
            pos,
            expected_len,
            len,
        } => IngestError::RaggedRow {
            file: file.to_owned(),
            line: pos.as_ref().map_or(0, |p| p.line()),
            expected: *expected_len,
            found: *len,
        },
        _ => IngestError::Csv {
            file: file.to_owned(),
            message: err.to_string(),
        },
    }
}

fn column_positions(header: &csv::StringRecord, wanted: &[&str], file: &str) -> Result<Vec<usize>> {
    let mut seen = BTreeSet::new();
    for h in header {
        if !seen.insert(h) {
            return Err(IngestError::HeaderMismatch {
                file: file.to_owned(),
                reason: format!("column `{h}` appears twice"),
            });
        }
    }
    wanted
        .iter()
        .map(|w| {
            header
                .iter()
                .position(|h| h == *w)
                .ok_or_else(|| IngestError::HeaderMismatch {
                    file: file.to_owned(),
                    reason: format!("missing column `{w}`"),
                })
        })
        .collect()
}

/// Reads a header-first fact CSV against `schema`. Extra columns are
/// ignored; `file` only labels errors.
pub fn read_fact_csv<R: Read>(reader: R, schema: StarSchema, file: &str) -> Result<Cube> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(e, file))?.clone();
    if header.is_empty() {
        return Err(IngestError::EmptyFactFile(file.to_owned()));
    }
    let dims: Vec<String> = schema.dimension_names().map(str::to_owned).collect();
    let mut wanted: Vec<&str> = dims.iter().map(String::as_str).collect();
    wanted.push(&schema.measure().name);
    let positions = column_positions(&header, &wanted, file)?;
    let (dim_pos, measure_pos) = positions.split_at(dims.len());
    let measure_pos = measure_pos[0];

    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(e, file))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = &record[measure_pos];
        let measure = raw.parse::<i64>().map_err(|_| IngestError::BadMeasure {
            line,
            value: raw.to_owned(),
        })?;
        let coords = dims
            .iter()
            .zip(dim_pos)
            .map(|(d, &i)| (d.clone(), record[i].to_owned()))
            .collect();
        rows.push(FactRow { coords, measure });
    }
    if rows.is_empty() {
        return Err(IngestError::EmptyFactFile(file.to_owned()));
    }
    Ok(build_cube(schema, rows)?)
}

pub fn read_detail_csv<R: Read>(reader: R, name: &str, file: &str) -> Result<DetailTable> {
    let mut rdr = csv_reader(reader);
    let header = rdr.headers().map_err(|e| csv_error(e, file))?.clone();
    let columns: Vec<String> = header.iter().map(str::to_owned).collect();
    column_positions(&header, &[], file)?;
    let rows = rdr
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(str::to_owned).collect())
                .map_err(|e| csv_error(e, file))
        })
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(DetailTable::new(name, columns, rows)?)
}

/// Writes the cube in the flat fact format: dimensions in schema order, then
/// the measure, one line per row in cube order.
pub fn write_fact_csv<W: Write>(cube: &Cube, writer: W) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let schema = cube.schema();
    let mut header: Vec<&str> = schema.dimension_names().collect();
    header.push(&schema.measure().name);
    wtr.write_record(&header)?;
    for row in cube.rows() {
        let mut record: Vec<String> = schema
            .dimension_names()
            .map(|d| row.get(d).unwrap_or_default().to_owned())
            .collect();
        record.push(row.measure.to_string());
        wtr.write_record(&record)?;
    }
    wtr.flush()
}

pub fn export_fact_csv(cube: &Cube) -> String {
    let mut buf = Vec::new();
    write_fact_csv(cube, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output of UTF-8 input is UTF-8")
}
