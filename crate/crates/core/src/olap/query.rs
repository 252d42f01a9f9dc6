use super::{DimensionFilter, PivotConfig};
use crate::error::Result;
use crate::schema::StarSchema;

/// Canonical group-by query for a pivot view:
///
/// ```text
/// select <dims>, sum(<measure>) as amount from <fact>[ where <clauses>] group by <dims>
/// ```
///
/// `<dims>` is the horizontal followed by the canonical verticals, and the
/// select list and group-by list are always the same text. Identifiers are
/// lowercased; filter clauses come in dimension-name order, a single value
/// renders as `= 'v'` and several as `in ('a','b')`.
pub fn query_text(
    schema: &StarSchema,
    config: &PivotConfig,
    filter: &DimensionFilter,
    fact_name: &str,
) -> Result<String> {
    config.validate(schema)?;
    filter.validate(schema)?;

    let dims = config
        .dimensions()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(", ");
    let measure = schema.measure().name.to_lowercase();
    let mut sql = format!(
        "select {dims}, sum({measure}) as amount from {}",
        fact_name.to_lowercase()
    );

    if !filter.is_empty() {
        let clauses: Vec<String> = filter
            .clauses()
            .iter()
            .map(|(dim, values)| {
                let dim = dim.to_lowercase();
                let mut quoted = values.iter().map(|v| quote(v));
                if values.len() == 1 {
                    format!("{dim} = {}", quoted.next().unwrap_or_default())
                } else {
                    format!("{dim} in ({})", quoted.collect::<Vec<_>>().join(","))
                }
            })
            .collect();
        sql.push_str(" where ");
        sql.push_str(&clauses.join(" and "));
    }

    sql.push_str(" group by ");
    sql.push_str(&dims);
    Ok(sql)
}

fn quote(value: &str) -> String {
    format!("'{}'", value.replace('\'', "''"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::olap::testutil::table1;

    #[test]
    fn full_view_query() {
        let c = table1();
        let cfg = PivotConfig::new("Year", ["Gen", "Deg"]).unwrap();
        assert_eq!(
            query_text(c.schema(), &cfg, &DimensionFilter::new(), "dwmhs").unwrap(),
            "select year, deg, gen, sum(amn) as amount from dwmhs group by year, deg, gen"
        );
    }

    #[test]
    fn rollup_query() {
        let c = table1();
        let cfg = PivotConfig::new("Year", Vec::<String>::new()).unwrap();
        assert_eq!(
            query_text(c.schema(), &cfg, &DimensionFilter::new(), "DWmhs").unwrap(),
            "select year, sum(amn) as amount from dwmhs group by year"
        );
    }

    #[test]
    fn where_clauses() {
        let c = table1();
        let cfg = PivotConfig::new("Gen", ["Deg"]).unwrap();
        let sql = query_text(
            c.schema(),
            &cfg,
            &DimensionFilter::single("Year", "2000"),
            "dwmhs",
        )
        .unwrap();
        assert_eq!(
            sql,
            "select gen, deg, sum(amn) as amount from dwmhs where year = '2000' group by gen, deg"
        );

        let f = DimensionFilter::new()
            .with("Year", ["2001", "2000"])
            .with("Gen", ["o'neil"]);
        let sql = query_text(c.schema(), &cfg, &f, "dwmhs").unwrap();
        assert!(
            sql.contains(" where gen = 'o''neil' and year in ('2000','2001') group by "),
            "{sql}"
        );
    }
}
