use intmat::{Error, Result};
use rug::Rational;
use serde_json::{json, Map, Value};

pub const TOOL: &str = "intmat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Everything one command produced, ready to be rendered in any format.
#[derive(Debug)]
pub struct Report {
    pub command: &'static str,
    pub config: Map<String, Value>,
    pub result: Value,
    pub table: Table,
    pub human: String,
}

/// `p/q`, always with an explicit denominator.
pub fn ratio_text(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let envelope = json!({
                "tool": TOOL,
                "version": VERSION,
                "command": report.command,
                "config": report.config,
                "result": report.result,
            });
            let mut s = serde_json::to_string_pretty(&envelope).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = format!("# tool={TOOL}\n# version={VERSION}\n# command={}\n", report.command);
            for (k, v) in &report.config {
                s.push_str(&format!("# {k}={v}\n"));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.table.header).map_err(csv_error)?;
            for row in &report.table.rows {
                w.write_record(row).map_err(csv_error)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            s.push_str(&String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))?);
            Ok(s)
        }
        Format::Human => {
            let config: Vec<String> = report.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
            Ok(format!(
                "# {TOOL} {VERSION} {} {}\n{}",
                report.command,
                config.join(" "),
                report.human
            ))
        }
    }
}

pub fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
