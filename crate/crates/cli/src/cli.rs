use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pivotcube::{grand_total, ChartData, Consistency, Cube, DrillResult, PivotReport};

use crate::error::AppError;
use crate::snapshot::{
    count_payload, cube_payload, parse_cell, parse_filter, split_list, to_json, view_line,
    views_payload, ApiPivotRequest, DrillRequest, RollupRequest, Snapshot,
};

#[derive(Debug, Parser)]
#[command(name = "pivotcube", version, about = "Star-schema OLAP cube explorer")]
pub struct Cli {
    /// Manifest describing the fact table and detail tables.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned plain-text tables.
    Table,
    /// Compact JSON, identical to the HTTP payloads.
    Machine,
}

#[derive(Debug, Args)]
pub struct PivotArgs {
    #[arg(long)]
    pub horizontal: String,
    /// Vertical dimensions in display order; repeat or comma-separate.
    #[arg(long = "vertical")]
    pub verticals: Vec<String>,
    /// `DIM=v1,v2`; repeat for several dimensions.
    #[arg(long = "filter")]
    pub filters: Vec<String>,
}

impl PivotArgs {
    fn request(&self) -> Result<ApiPivotRequest, AppError> {
        let filter = parse_filter(&self.filters)?;
        Ok(ApiPivotRequest {
            horizontal: self.horizontal.clone(),
            verticals: split_list(&self.verticals),
            filter: filter
                .clauses()
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                .collect(),
            display_vertical_order: None,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the manifest and report what was loaded.
    Load,
    /// Group by one horizontal and any vertical dimensions.
    Pivot(PivotArgs),
    /// Keep the rows where one dimension has one value.
    Slice {
        #[arg(long)]
        dim: String,
        #[arg(long)]
        value: String,
    },
    /// Keep the rows matching every filter clause.
    Dice {
        #[arg(long = "filter")]
        filters: Vec<String>,
    },
    /// Sum the measure over every dimension not kept.
    Rollup {
        #[arg(long, required = true)]
        keep: Vec<String>,
        #[arg(long = "filter")]
        filters: Vec<String>,
    },
    /// Show the detail rows behind a fact cell.
    Drill {
        /// `DIM=value`; repeat for each coordinate.
        #[arg(long = "cell", required = true)]
        cells: Vec<String>,
        #[arg(long)]
        detail: Option<String>,
    },
    /// List every distinct view with `r` dimensions.
    Enumerate {
        /// Dimension names; defaults to the manifest's dimensions.
        #[arg(long)]
        dims: Vec<String>,
        #[arg(long)]
        r: usize,
    },
    /// Count the views of an n-dimensional cube for every r.
    Count {
        /// Defaults to the manifest's dimension count.
        #[arg(long)]
        n: Option<u64>,
    },
    /// Print the group-by query for a view.
    Query {
        #[command(flatten)]
        pivot: PivotArgs,
        /// Fact table name; defaults to the fact file's stem.
        #[arg(long)]
        table: Option<String>,
    },
    /// Emit chart series for a view.
    Chart(PivotArgs),
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: String,
    },
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(AppError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn snapshot(cli: &Cli) -> Result<Snapshot, AppError> {
    let path = cli
        .manifest
        .as_ref()
        .ok_or_else(|| AppError::Usage("--manifest is required for this command".into()))?;
    Snapshot::load(path)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), AppError> {
    let machine = cli.format == Format::Machine;
    let text = match &cli.command {
        Command::Load => {
            let snap = snapshot(cli)?;
            if machine {
                to_json(&snap.schema_payload())
            } else {
                render_load(&snap)
            }
        }
        Command::Pivot(args) => {
            let report = snapshot(cli)?.pivot(&args.request()?)?;
            if machine {
                to_json(&report)
            } else {
                render_report(&report)
            }
        }
        Command::Slice { dim, value } => {
            let cube = pivotcube::slice(snapshot(cli)?.cube(), dim, value)?;
            render_cube(&cube, machine)
        }
        Command::Dice { filters } => {
            let cube = pivotcube::dice(snapshot(cli)?.cube(), &parse_filter(filters)?)?;
            render_cube(&cube, machine)
        }
        Command::Rollup { keep, filters } => {
            let request = RollupRequest {
                keep: split_list(keep),
                filter: parse_filter(filters)?
                    .clauses()
                    .iter()
                    .map(|(k, v)| (k.clone(), v.iter().cloned().collect()))
                    .collect(),
            };
            let cube = snapshot(cli)?.rollup(&request)?;
            render_cube(&cube, machine)
        }
        Command::Drill { cells, detail } => {
            let request = DrillRequest {
                cell: parse_cell(cells)?,
                detail: detail.clone(),
            };
            let result = snapshot(cli)?.drill(&request)?;
            if machine {
                to_json(&result)
            } else {
                render_drill(&result)
            }
        }
        Command::Enumerate { dims, r } => {
            let dims = if dims.is_empty() {
                snapshot(cli)?.dimension_names()
            } else {
                split_list(dims)
            };
            if machine {
                to_json(&views_payload(&dims, *r)?)
            } else {
                pivotcube::combinatorics::enumerate_views(&dims, *r)?
                    .iter()
                    .map(view_line)
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        }
        Command::Count { n } => {
            let n = match n {
                Some(n) => *n,
                None => snapshot(cli)?.cube().n() as u64,
            };
            let counts = count_payload(n)?;
            if machine {
                to_json(&counts)
            } else {
                let per_r: Vec<String> = counts.per_r.iter().map(u64::to_string).collect();
                format!(
                    "n {}\nper_r {}\ntotal {}\nper_horizontal {}",
                    counts.n,
                    per_r.join(" "),
                    counts.total,
                    counts.per_horizontal
                )
            }
        }
        Command::Query { pivot, table } => {
            let sql = snapshot(cli)?.query(&pivot.request()?, table.as_deref())?;
            if machine {
                to_json(&serde_json::json!({ "query": sql }))
            } else {
                sql
            }
        }
        Command::Chart(args) => {
            let chart = snapshot(cli)?.chart(&args.request()?)?;
            if machine {
                to_json(&chart)
            } else {
                render_chart(&chart)
            }
        }
        Command::Serve { port, bind } => {
            let snap = snapshot(cli)?;
            let path = cli.manifest.clone().unwrap_or_default();
            let addr: SocketAddr = format!("{bind}:{port}")
                .parse()
                .map_err(|_| AppError::Usage(format!("bad bind address `{bind}:{port}`")))?;
            crate::server::serve_blocking(path, snap, addr)?;
            return Ok(());
        }
    };
    writeln!(out, "{text}")?;
    Ok(())
}

/// Left-aligns the first column and right-aligns the rest.
fn render_grid(rows: &[Vec<String>]) -> String {
    render_aligned(rows, true)
}

fn render_aligned(rows: &[Vec<String>], right_align: bool) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else if !right_align {
                let _ = write!(line, "  {cell:<w$}", w = widths[c]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        text.push_str(line.trim_end());
        text.push('\n');
    }
    text.pop();
    text
}

fn render_load(snap: &Snapshot) -> String {
    let cube = snap.cube();
    let schema = cube.schema();
    let measure = schema.measure();
    let mut rows = vec![
        vec![
            "fact".to_owned(),
            snap.manifest.fact.file.display().to_string(),
        ],
        vec!["rows".to_owned(), cube.len().to_string()],
        vec![
            "dimensions".to_owned(),
            format!("{} (n={})", snap.dimension_names().join(", "), cube.n()),
        ],
        vec![
            "measure".to_owned(),
            format!(
                "{} ({})",
                measure.name,
                to_json(&measure.semantics).trim_matches('"')
            ),
        ],
        vec!["total".to_owned(), grand_total(cube).to_string()],
    ];
    for d in &snap.star.details {
        rows.push(vec![
            "detail".to_owned(),
            format!(
                "{}: {} rows, {} rules",
                d.table.name(),
                d.table.rows().len(),
                d.rules.len()
            ),
        ]);
    }
    // Two text columns, both left-aligned.
    let width = rows.iter().map(|r| r[0].len()).max().unwrap_or(0);
    rows.iter()
        .map(|r| format!("{:<width$}  {}", r[0], r[1]))
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_report(report: &PivotReport) -> String {
    let cells = report.cell_map();
    let mut grid = Vec::with_capacity(report.row_keys.len() + 2);
    let mut header = vec![report.config.horizontal().to_owned()];
    header.extend(report.legend_labels.iter().cloned());
    grid.push(header);
    for row in &report.row_keys {
        let mut line = vec![row.clone()];
        for col in &report.col_keys {
            line.push(
                cells
                    .get(&(row.clone(), col.clone()))
                    .map_or_else(|| "-".to_owned(), i64::to_string),
            );
        }
        grid.push(line);
    }
    grid.push(vec!["total".to_owned(), report.grand_total.to_string()]);
    render_grid(&grid)
}

fn render_cube(cube: &Cube, machine: bool) -> String {
    if machine {
        return to_json(&cube_payload(cube));
    }
    let schema = cube.schema();
    let mut header: Vec<String> = schema.dimension_names().map(str::to_owned).collect();
    header.push(schema.measure().name.clone());
    let mut grid = vec![header];
    for row in cube.rows() {
        let mut line: Vec<String> = schema
            .dimension_names()
            .map(|d| row.get(d).unwrap_or_default().to_owned())
            .collect();
        line.push(row.measure.to_string());
        grid.push(line);
    }
    grid.push(vec!["total".to_owned(), grand_total(cube).to_string()]);
    render_grid(&grid)
}

fn render_drill(result: &DrillResult) -> String {
    let mut grid = vec![result.columns.clone()];
    grid.extend(result.detail_rows.iter().cloned());
    let consistency = match result.consistency {
        Consistency::Consistent => "consistent".to_owned(),
        Consistency::Mismatch { expected, actual } => {
            format!("mismatch (expected {expected}, found {actual})")
        }
        Consistency::NotApplicable => "n/a".to_owned(),
    };
    format!(
        "{}\ncardinality {}\nconsistency {consistency}",
        render_aligned(&grid, false),
        result.cardinality
    )
}

fn render_chart(chart: &ChartData) -> String {
    let mut grid = Vec::with_capacity(chart.series.len() + 1);
    let mut header = vec![String::new()];
    header.extend(chart.x_axis.iter().cloned());
    grid.push(header);
    for s in &chart.series {
        let mut line = vec![s.label.clone()];
        line.extend(
            s.points
                .iter()
                .map(|p| p.map_or_else(|| "-".to_owned(), |v| v.to_string())),
        );
        grid.push(line);
    }
    render_grid(&grid)
}
