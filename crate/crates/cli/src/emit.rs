//! Table output as CSV or JSON with fixed 17-significant-digit numbers.

use std::io::Write;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    /// A closed interval; two columns in CSV (`<name>_lo`, `<name>_hi`), an array in JSON.
    Pair(f64, f64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Deterministic run description (no timestamps).
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    /// Columns holding [`Cell::Pair`] values.
    pub pairs: Vec<bool>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            pairs: vec![false; columns.len()],
            rows: Vec::new(),
        }
    }

    /// Marks `name` as an interval column.
    pub fn with_pair(mut self, name: &str) -> Self {
        let i = self.columns.iter().position(|c| c == name).expect("known column");
        self.pairs[i] = true;
        self
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// 17 significant digits; NaN and infinities have no numeric form.
pub fn format_number(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

pub fn to_csv(table: &Table) -> String {
    let mut out = format!("# magictrap v{VERSION}\n");
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let mut header = Vec::new();
    for (name, &pair) in table.columns.iter().zip(&table.pairs) {
        if pair {
            header.push(format!("{name}_lo"));
            header.push(format!("{name}_hi"));
        } else {
            header.push(name.clone());
        }
    }
    w.write_record(&header).expect("in-memory write");
    for row in &table.rows {
        let mut fields = Vec::new();
        for cell in row {
            match cell {
                Cell::Num(x) => fields.push(format_number(*x).unwrap_or_default()),
                Cell::Int(i) => fields.push(i.to_string()),
                Cell::Text(s) => fields.push(s.clone()),
                Cell::Pair(a, b) => {
                    fields.push(format_number(*a).unwrap_or_default());
                    fields.push(format_number(*b).unwrap_or_default());
                }
            }
        }
        w.write_record(&fields).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields"));
    out
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn json_number(x: f64) -> String {
    format_number(x).unwrap_or_else(|| "null".into())
}

pub fn to_json(table: &Table) -> String {
    let mut out = String::from("{\n  \"meta\": {");
    let mut meta = vec![("tool".to_string(), "magictrap".to_string()), ("version".to_string(), VERSION.to_string())];
    meta.extend(table.meta.iter().cloned());
    let items: Vec<String> = meta.iter().map(|(k, v)| format!("{}: {}", json_string(k), json_string(v))).collect();
    out.push_str(&items.join(", "));
    out.push_str("},\n  \"columns\": [");
    out.push_str(&table.columns.iter().map(|c| json_string(c)).collect::<Vec<_>>().join(", "));
    out.push_str("],\n  \"rows\": [");
    for (i, row) in table.rows.iter().enumerate() {
        out.push_str(if i == 0 { "\n    {" } else { ",\n    {" });
        let fields: Vec<String> = table
            .columns
            .iter()
            .zip(row)
            .map(|(name, cell)| {
                let value = match cell {
                    Cell::Num(x) => json_number(*x),
                    Cell::Int(i) => i.to_string(),
                    Cell::Text(s) => json_string(s),
                    Cell::Pair(a, b) => format!("[{}, {}]", json_number(*a), json_number(*b)),
                };
                format!("{}: {}", json_string(name), value)
            })
            .collect();
        out.push_str(&fields.join(", "));
        out.push('}');
    }
    if !table.rows.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("]\n}\n");
    out
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

/// `<path>.meta.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the data file and a sidecar with run metadata (the only place a
/// timestamp appears).
pub fn write_outputs(path: &Path, data: &str, argv: &[String], jobs: Option<usize>) -> std::io::Result<()> {
    std::fs::File::create(path)?.write_all(data.as_bytes())?;
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let sidecar = format!(
        "{{\n  \"tool\": \"magictrap\",\n  \"version\": {},\n  \"argv\": {},\n  \"jobs\": {},\n  \"unix_time\": {}\n}}\n",
        json_string(VERSION),
        serde_json::to_string(argv).expect("argv serialization"),
        jobs.map_or("null".to_string(), |j| j.to_string()),
        secs
    );
    std::fs::write(sidecar_path(path), sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(&["x", "y", "label"]).meta("command", "test");
        t.push(vec![Cell::Num(0.1), Cell::Num(1.0 / 3.0), "a".into()]);
        t.push(vec![Cell::Num(-2.5e-300), Cell::Num(f64::NAN), "b,c".into()]);
        t.push(vec![Cell::Num(6.02214076e23), Cell::Num(f64::MIN_POSITIVE), "d".into()]);
        t
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(to_csv(&t), format!("# magictrap v{VERSION}\na,b\n"));
    }

    #[test]
    fn csv_round_trip_keeps_all_digits() {
        let t = sample();
        let text = to_csv(&t);
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        for (row, orig) in rows.iter().zip(&t.rows) {
            for k in 0..2 {
                let Cell::Num(x) = orig[k] else { unreachable!() };
                let field = &row[k];
                if x.is_nan() {
                    assert_eq!(field, "");
                } else {
                    assert_eq!(field.parse::<f64>().unwrap().to_bits(), x.to_bits());
                }
            }
        }
        assert_eq!(&rows[1][2], "b,c");
    }

    #[test]
    fn json_round_trip_keeps_all_digits() {
        let t = sample();
        let v: serde_json::Value = serde_json::from_str(&to_json(&t)).unwrap();
        assert_eq!(v["meta"]["command"], "test");
        assert_eq!(v["columns"][1], "y");
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0]["y"].as_f64().unwrap().to_bits(), (1.0f64 / 3.0).to_bits());
        assert!(rows[1]["y"].is_null());
        assert_eq!(rows[2]["x"].as_f64().unwrap(), 6.02214076e23);
    }

    #[test]
    fn pairs_expand_in_csv() {
        let mut t = Table::new(&["lambda_nm", "bracket_nm"]).with_pair("bracket_nm");
        assert!(to_csv(&t).ends_with("lambda_nm,bracket_nm_lo,bracket_nm_hi\n"));
        t.push(vec![Cell::Num(813.0), Cell::Pair(812.9, 813.1)]);
        let csv = to_csv(&t);
        assert!(csv.contains("lambda_nm,bracket_nm_lo,bracket_nm_hi"));
        let v: serde_json::Value = serde_json::from_str(&to_json(&t)).unwrap();
        assert_eq!(v["rows"][0]["bracket_nm"][1].as_f64().unwrap(), 813.1);
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/scan.csv")), PathBuf::from("out/scan.csv.meta.json"));
    }
}
