//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any
//! criterion fails or overruns its time budget.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pivotcube::combinatorics::{brute_force_count, enumerate_views, total_view_count, view_count};
use pivotcube::ingest::{load, LoadedStar};
use pivotcube::*;
use proptest::prelude::*;
use proptest::sample::subsequence;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn student() -> LoadedStar {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/student.manifest");
    load(path).expect("student fixture loads").1
}

fn key(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn table2_reproduction() -> Outcome {
    let star = student();
    let cfg = PivotConfig::new("Gen", ["Deg"]).map_err(err)?;
    let report = pivot(&star.cube, &cfg, &DimensionFilter::single("Year", "2000")).map_err(err)?;
    let got: BTreeMap<(String, String), i64> = report
        .cells
        .iter()
        .map(|c| ((c.row.clone(), c.col["Deg"].clone()), c.value))
        .collect();
    let expected: BTreeMap<(String, String), i64> = [
        (("p", "5"), 21),
        (("p", "3"), 12),
        (("w", "5"), 22),
        (("w", "3"), 13),
    ]
    .into_iter()
    .map(|((g, d), v)| ((g.to_owned(), d.to_owned()), v))
    .collect();
    ensure!(got == expected, "cells {got:?} != {expected:?}");
    Ok(())
}

fn rollup_conservation() -> Outcome {
    let star = student();
    let rolled = rollup(&star.cube, &["Year"]).map_err(err)?;
    let got: Vec<(String, i64)> = rolled
        .rows()
        .iter()
        .map(|r| (r.get("Year").unwrap_or_default().to_owned(), r.measure))
        .collect();
    let expected = vec![
        ("2000".to_owned(), 68),
        ("2001".to_owned(), 106),
        ("2002".to_owned(), 154),
    ];
    ensure!(got == expected, "rollup {got:?} != {expected:?}");
    let sum: i64 = got.iter().map(|(_, v)| v).sum();
    ensure!(sum == 328, "rolled sum {sum} != 328");
    ensure!(
        grand_total(&star.cube) == 328,
        "grand total {} != 328",
        grand_total(&star.cube)
    );
    Ok(())
}

fn table6_reproduction() -> Outcome {
    let counts = total_view_count(3).map_err(err)?;
    ensure!(counts.per_r == [3, 6, 3], "per_r {:?}", counts.per_r);
    ensure!(counts.total == 12, "total {}", counts.total);
    ensure!(
        counts.per_horizontal == 4,
        "per_horizontal {}",
        counts.per_horizontal
    );

    let expected: [&[&str]; 3] = [
        &["A|", "B|", "C|"],
        &["A|B", "A|C", "B|A", "B|C", "C|A", "C|B"],
        &["A|B,C", "B|A,C", "C|A,B"],
    ];
    for (r, want) in (1..=3).zip(expected) {
        let got: Vec<String> = enumerate_views(&["A", "B", "C"], r)
            .map_err(err)?
            .iter()
            .map(|v| format!("{}|{}", v.horizontal(), v.verticals().join(",")))
            .collect();
        ensure!(got == want, "r={r}: {got:?} != {want:?}");
    }
    Ok(())
}

fn formula_oracle_agreement() -> Outcome {
    for n in 1..=8usize {
        let dims: Vec<String> = (0..n).map(|i| format!("D{i}")).collect();
        let mut sum = 0;
        for r in 1..=n {
            let oracle = brute_force_count(&dims, r).map_err(err)?;
            let formula = view_count(n as u64, r as u64).map_err(err)?;
            let listed = enumerate_views(&dims, r).map_err(err)?.len() as u64;
            ensure!(
                oracle == formula && formula == listed,
                "n={n} r={r}: oracle {oracle}, formula {formula}, enumerated {listed}"
            );
            sum += formula;
        }
        let closed = (n as u64) << (n - 1);
        ensure!(sum == closed, "n={n}: sum {sum} != n*2^(n-1) = {closed}");
    }
    Ok(())
}

fn endpoint_symmetry() -> Outcome {
    for n in 1..=20u64 {
        let first = view_count(n, 1).map_err(err)?;
        let last = view_count(n, n).map_err(err)?;
        ensure!(
            first == n && last == n,
            "n={n}: r=1 -> {first}, r=n -> {last}"
        );
    }
    Ok(())
}

fn vertical_swap_invariance() -> Outcome {
    let star = student();
    let a = pivot(
        &star.cube,
        &PivotConfig::new("Year", ["Deg", "Gen"]).map_err(err)?,
        &DimensionFilter::new(),
    )
    .map_err(err)?;
    let b = pivot(
        &star.cube,
        &PivotConfig::new("Year", ["Gen", "Deg"]).map_err(err)?,
        &DimensionFilter::new(),
    )
    .map_err(err)?;
    ensure!(a.cell_map() == b.cell_map(), "cell mappings differ");
    ensure!(
        a.grand_total == 328 && b.grand_total == 328,
        "grand totals {} / {}",
        a.grand_total,
        b.grand_total
    );
    ensure!(
        a.legend_labels != b.legend_labels,
        "legend labels did not change"
    );
    ensure!(
        a.legend_labels.contains(&"5p".to_owned()) && b.legend_labels.contains(&"p5".to_owned()),
        "labels {:?} / {:?}",
        a.legend_labels,
        b.legend_labels
    );
    let mut a_only = a.clone();
    a_only.legend_labels = b.legend_labels.clone();
    a_only.config = b.config.clone();
    ensure!(a_only == b, "reports differ beyond legend labels");
    Ok(())
}

fn drill_consistency() -> Outcome {
    let star = student();
    let master = star
        .detail("student_master")
        .ok_or("student_master detail missing")?;
    let result = drilldown(
        &star.cube,
        &key(&[("Year", "2000"), ("Deg", "5"), ("SP", "11"), ("Gen", "p")]),
        &master.table,
        &master.rules,
    )
    .map_err(err)?;
    ensure!(
        result.cardinality == 11,
        "cardinality {}",
        result.cardinality
    );
    ensure!(
        result.detail_rows.len() == 11,
        "rows {}",
        result.detail_rows.len()
    );
    ensure!(
        result.consistency == Consistency::Consistent,
        "consistency {:?}",
        result.consistency
    );
    Ok(())
}

fn query_canon() -> Outcome {
    const DIMS: [&str; 5] = ["Region", "Year", "Product", "Channel", "Segment"];
    let schema = StarSchema::new(
        DIMS.iter().map(|d| DimensionDef::new(*d)).collect(),
        MeasureDef::new("Sales", MeasureSemantics::Sum),
    )
    .map_err(err)?;

    let value = prop::sample::select(vec!["a", "b", "c", "o'k"]);
    let filter = prop::collection::btree_map(
        prop::sample::select(DIMS.to_vec()),
        prop::collection::btree_set(value, 1..3),
        0..3,
    );
    let strategy = (0..DIMS.len())
        .prop_flat_map(|h| {
            let others: Vec<&str> = DIMS.iter().copied().filter(|d| *d != DIMS[h]).collect();
            (Just(h), subsequence(others, 0..=4).prop_shuffle())
        })
        .prop_flat_map(move |(h, v)| (Just(h), Just(v), filter.clone()));

    let config = Config {
        cases: 100,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner =
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let checked = std::cell::Cell::new(0u32);
    runner
        .run(&strategy, |(h, v, clauses)| {
            let cfg = PivotConfig::new(DIMS[h], v).unwrap();
            let mut f = DimensionFilter::new();
            for (dim, values) in clauses {
                f = f.with(dim, values);
            }
            let sql = query_text(&schema, &cfg, &f, "sales_fact").unwrap();
            let select = sql
                .strip_prefix("select ")
                .and_then(|s| s.split_once(", sum(sales) as amount from "))
                .map(|(s, _)| s)
                .unwrap_or("<unparsed>");
            let group = sql
                .rsplit_once(" group by ")
                .map(|(_, g)| g)
                .unwrap_or("<unparsed>");
            prop_assert_eq!(select, group, "{}", sql);
            checked.set(checked.get() + 1);
            Ok(())
        })
        .map_err(err)?;
    let checked = checked.get();
    ensure!(checked >= 100, "only {checked} configs checked");
    Ok(())
}

fn filter_pushdown() -> Outcome {
    let star = student();
    let dims: Vec<&str> = star.cube.schema().dimension_names().collect();
    let sliced = slice(&star.cube, "Year", "2000").map_err(err)?;
    let filter = DimensionFilter::single("Year", "2000");
    let mut configs = 0;
    for r in 1..=dims.len() {
        for cfg in enumerate_views(&dims, r).map_err(err)? {
            let a = pivot(&sliced, &cfg, &DimensionFilter::new()).map_err(err)?;
            let b = pivot(&star.cube, &cfg, &filter).map_err(err)?;
            ensure!(
                a.cell_map() == b.cell_map(),
                "config {}|{} differs",
                cfg.horizontal(),
                cfg.verticals().join(",")
            );
            configs += 1;
        }
    }
    ensure!(configs == 32, "checked {configs} configs, expected 32");
    Ok(())
}

type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "table 2 reproduction",
            Duration::from_secs(1),
            table2_reproduction,
        ),
        (
            "roll-up conservation",
            Duration::from_secs(1),
            rollup_conservation,
        ),
        (
            "table 6 reproduction",
            Duration::from_secs(1),
            table6_reproduction,
        ),
        (
            "formula/oracle agreement n<=8",
            Duration::from_secs(5),
            formula_oracle_agreement,
        ),
        (
            "first = last = n for n<=20",
            Duration::from_secs(1),
            endpoint_symmetry,
        ),
        (
            "vertical-swap invariance",
            Duration::from_secs(1),
            vertical_swap_invariance,
        ),
        (
            "drill-down consistency",
            Duration::from_secs(1),
            drill_consistency,
        ),
        (
            "query canon, 100 random configs",
            Duration::from_secs(1),
            query_canon,
        ),
        (
            "filter pushdown, 32 configs",
            Duration::from_secs(1),
            filter_pushdown,
        ),
    ];

    let mut failures = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= budget {
                Ok(())
            } else {
                Err(format!("took {elapsed:?}, budget {budget:?}"))
            }
        });
        match outcome {
            Ok(()) => println!("PASS  {name} ({:.1} ms)", elapsed.as_secs_f64() * 1e3),
            Err(msg) => {
                failures += 1;
                println!("FAIL  {name}: {msg}");
            }
        }
    }
    println!("{} passed, {failures} failed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
