//! Report assembly and emission: one summary of scalars plus optional data
//! tables, written as CSV (17 significant digits, RFC 4180) or as a single
//! JSON object {tool, params, derived, results} with stable key order.

use std::io::Write;
use std::path::Path;

use reservoir_core::DerivedParams;
use serde_json::{Map, Value};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub enum Val {
    Real(f64),
    Int(i64),
    Str(&'static str),
    Bool(bool),
}

impl Val {
    fn csv(&self) -> String {
        match self {
            Val::Real(x) => real(*x),
            Val::Int(i) => i.to_string(),
            Val::Str(s) => quote(s),
            Val::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Val::Real(x) => Value::from(*x),
            Val::Int(i) => Value::from(*i),
            Val::Str(s) => Value::from(*s),
            Val::Bool(b) => Value::from(*b),
        }
    }
}

/// 17 significant digits: enough to reproduce any f64 exactly.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// RFC 4180 quoting; only applied when the field needs it.
fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Derived quantities echoed back; shape depends on the command.
pub enum DerivedEcho {
    Model(DerivedParams),
    Bracket { lo: f64, hi: f64 },
    Moran { quad_upper: f64, z_max: f64 },
}

impl DerivedEcho {
    fn entries(&self) -> Vec<(&'static str, Val)> {
        match self {
            DerivedEcho::Model(d) => vec![
                ("n", Val::Int(d.n as i64)),
                ("delta", Val::Real(d.delta)),
                ("lambda", Val::Real(d.lambda)),
                ("kappa", Val::Int(d.kappa as i64)),
            ],
            DerivedEcho::Bracket { lo, hi } => {
                vec![("lo", Val::Real(*lo)), ("hi", Val::Real(*hi))]
            }
            DerivedEcho::Moran { quad_upper, z_max } => vec![
                ("quad_upper", Val::Real(*quad_upper)),
                ("z_max", Val::Real(*z_max)),
            ],
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub struct Report {
    tool: ToolInfo,
    params: Vec<(&'static str, Val)>,
    pub derived: Option<DerivedEcho>,
    results: Vec<(String, Val)>,
    tables: Vec<(&'static str, Table)>,
}

impl Report {
    pub fn new(tool: ToolInfo) -> Self {
        Self { tool, params: Vec::new(), derived: None, results: Vec::new(), tables: Vec::new() }
    }

    pub fn param_real(&mut self, key: &'static str, x: f64) {
        self.params.push((key, Val::Real(x)));
    }

    pub fn param_int(&mut self, key: &'static str, i: i64) {
        self.params.push((key, Val::Int(i)));
    }

    pub fn params_model(&mut self, p: &reservoir_core::ModelParams) {
        self.param_real("v", p.v);
        self.param_int("p", p.p as i64);
        self.param_real("mu", p.mu);
        self.param_real("m", p.m);
    }

    pub fn derived_model(&mut self, d: &DerivedParams) {
        self.derived = Some(DerivedEcho::Model(*d));
    }

    pub fn result_real(&mut self, key: &str, x: f64) {
        self.results.push((key.to_string(), Val::Real(x)));
    }

    pub fn result_int(&mut self, key: &str, i: i64) {
        self.results.push((key.to_string(), Val::Int(i)));
    }

    pub fn result_str(&mut self, key: &str, s: &'static str) {
        self.results.push((key.to_string(), Val::Str(s)));
    }

    pub fn result_bool(&mut self, key: &str, b: bool) {
        self.results.push((key.to_string(), Val::Bool(b)));
    }

    pub fn table(&mut self, name: &'static str, table: Table) {
        self.tables.push((name, table));
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("key,value\n");
        out.push_str(&format!("tool,{} {}\n", self.tool.name, self.tool.version));
        for (k, v) in &self.params {
            out.push_str(&format!("{k},{}\n", v.csv()));
        }
        if let Some(derived) = &self.derived {
            for (k, v) in derived.entries() {
                out.push_str(&format!("{k},{}\n", v.csv()));
            }
        }
        for (k, v) in &self.results {
            out.push_str(&format!("{},{}\n", quote(k), v.csv()));
        }
        for (_, table) in &self.tables {
            out.push('\n');
            out.push_str(&table.header.join(","));
            out.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&x| real(x)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    fn to_json(&self) -> String {
        let mut root = Map::new();
        let mut tool = Map::new();
        tool.insert("name".into(), Value::from(self.tool.name));
        tool.insert("version".into(), Value::from(self.tool.version));
        root.insert("tool".into(), Value::Object(tool));

        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert((*k).into(), v.json());
        }
        root.insert("params".into(), Value::Object(params));

        let mut derived = Map::new();
        if let Some(d) = &self.derived {
            for (k, v) in d.entries() {
                derived.insert(k.into(), v.json());
            }
        }
        root.insert("derived".into(), Value::Object(derived));

        let mut results = Map::new();
        for (k, v) in &self.results {
            results.insert(k.clone(), v.json());
        }
        for (name, table) in &self.tables {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (col, &x) in table.header.iter().zip(row) {
                        obj.insert((*col).into(), Value::from(x));
                    }
                    Value::Object(obj)
                })
                .collect();
            results.insert((*name).into(), Value::Array(rows));
        }
        root.insert("results".into(), Value::Object(results));

        let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, format: Format, out: Option<&Path>) -> std::io::Result<()> {
        let text = match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        };
        match out {
            Some(path) => std::fs::write(path, text),
            None => std::io::stdout().write_all(text.as_bytes()),
        }
    }
}
