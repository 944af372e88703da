//! Plot-ready output tables: CSV (one header line, 17 significant digits)
//! and JSON (`{"config": ..., "summary": ..., "columns": [...], "rows": [[...]]}`),
//! plus parsers that reload emitted files losslessly.

use serde_json::{json, Map, Value};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    /// Echo of the run configuration, written as comments/metadata.
    pub config: Vec<(String, String)>,
    /// Scalar results accompanying the rows.
    pub summary: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// 17 significant digits: enough for a lossless f64 round trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.config {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# summary {k} = {}\n", fmt_f64(*v)));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(v) => fmt_f64(*v),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let config: Map<String, Value> = self
            .config
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), json!(v)))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|c| match c {
                            Cell::Num(v) => json!(v),
                            Cell::Text(t) => Value::String(t.clone()),
                        })
                        .collect(),
                )
            })
            .collect();
        json!({
            "config": config,
            "summary": summary,
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn parse_csv(text: &str) -> Result<Table, String> {
        let mut table = Table::default();
        let mut saw_header = false;
        for line in text.lines() {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(sum) = rest.strip_prefix("summary ") {
                    let (k, v) = sum.split_once('=').ok_or("malformed summary comment")?;
                    table.summary.push((
                        k.trim().to_string(),
                        v.trim().parse::<f64>().map_err(|e| e.to_string())?,
                    ));
                } else if let Some((k, v)) = rest.split_once('=') {
                    table
                        .config
                        .push((k.trim().to_string(), v.trim().to_string()));
                }
                continue;
            }
            if !saw_header {
                table.columns = line.split(',').map(|s| s.to_string()).collect();
                saw_header = true;
                continue;
            }
            let row: Vec<Cell> = line
                .split(',')
                .map(|field| match field.parse::<f64>() {
                    Ok(v) => Cell::Num(v),
                    Err(_) => Cell::Text(field.to_string()),
                })
                .collect();
            if row.len() != table.columns.len() {
                return Err(format!("row width {} != header {}", row.len(), table.columns.len()));
            }
            table.rows.push(row);
        }
        if !saw_header {
            return Err("missing header line".into());
        }
        Ok(table)
    }

    pub fn parse_json(text: &str) -> Result<Table, String> {
        let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut table = Table::default();
        if let Some(cfg) = value.get("config").and_then(Value::as_object) {
            for (k, v) in cfg {
                table
                    .config
                    .push((k.clone(), v.as_str().unwrap_or_default().to_string()));
            }
        }
        if let Some(sum) = value.get("summary").and_then(Value::as_object) {
            for (k, v) in sum {
                table
                    .summary
                    .push((k.clone(), v.as_f64().ok_or("non-numeric summary entry")?));
            }
        }
        table.columns = value
            .get("columns")
            .and_then(Value::as_array)
            .ok_or("missing columns")?
            .iter()
            .map(|c| c.as_str().unwrap_or_default().to_string())
            .collect();
        for row in value
            .get("rows")
            .and_then(Value::as_array)
            .ok_or("missing rows")?
        {
            let cells: Vec<Cell> = row
                .as_array()
                .ok_or("row is not an array")?
                .iter()
                .map(|c| match c {
                    Value::Number(n) => Cell::Num(n.as_f64().unwrap()),
                    Value::String(s) => Cell::Text(s.clone()),
                    other => Cell::Text(other.to_string()),
                })
                .collect();
            table.rows.push(cells);
        }
        Ok(table)
    }
}
