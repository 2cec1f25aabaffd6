use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Map, Value};

use super::config::ConfigFile;
use super::format::{csv_line, human, json_number, number};
use super::{
    CliError, DataArgs, Format, Outcome, OutputArgs, PriorArgs, RegionArgs, SpecArgs, SweepArgs,
    EXIT_OK,
};
use crate::data::{summarize, Dataset};
use crate::error::Error;
use crate::model::{beta_adjusted, BoundSpec, ConfoundingInterval, SensitivityTuple, SummaryStats};
use crate::oracle::{ols_beta, GridConfig};
use crate::prior::{propagate_prior, Marginal, PriorSpec};
use crate::region::{necessary_region, SignificanceRange, DEFAULT_REGION_RESOLUTION};
use crate::solver::solve_with_candidates;

pub const DEFAULT_R2: (f64, f64) = (0.0, 0.99);
pub const DEFAULT_RHO: (f64, f64) = (-1.0, 1.0);
pub const DEFAULT_STEPS: usize = 21;
pub const DEFAULT_SAMPLES: usize = 10_000;

/// One value in a report.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Missing,
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Num(v) => number(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn human(&self) -> String {
        match self {
            Cell::Num(v) => human(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => "-".into(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => json_number(*v),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Missing => Value::Null,
        }
    }
}

/// Rows sharing one header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn csv(&self) -> String {
        let mut out = csv_line(&self.columns);
        for row in &self.rows {
            out.push_str(&csv_line(
                &row.iter().map(Cell::machine).collect::<Vec<_>>(),
            ));
        }
        out
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    /// Right-aligned columns for terminals.
    pub fn text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::human).collect())
            .collect();
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([c.len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |fields: &[String]| {
            let parts: Vec<String> = fields
                .iter()
                .zip(&widths)
                .map(|(f, w)| format!("{f:>w$}"))
                .collect();
            parts.join("  ") + "\n"
        };
        let mut out = line(&self.columns);
        for r in &cells {
            out.push_str(&line(r));
        }
        out
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::io(format!("cannot read config {}: {e}", p.display())))?;
            ConfigFile::parse(&text)
        }
    }
}

pub fn output_format(out: &OutputArgs, cfg: &ConfigFile) -> Result<Format, CliError> {
    if let Some(f) = out.format {
        return Ok(f);
    }
    match cfg.string("format").as_deref() {
        None | Some("table") => Ok(Format::Table),
        Some("csv") => Ok(Format::Csv),
        Some("json") => Ok(Format::Json),
        Some(other) => Err(CliError::invalid(format!(
            "format: expected table, csv or json, got '{other}'"
        ))),
    }
}

/// Writes `text` to `--out` if given, otherwise hands it back for stdout.
pub fn deliver(text: String, out: &OutputArgs, cfg: &ConfigFile) -> Result<Outcome, CliError> {
    let path = out
        .out
        .clone()
        .or_else(|| cfg.string("out").map(Into::into));
    match path {
        None => Ok(Outcome {
            stdout: text,
            code: EXIT_OK,
        }),
        Some(p) => {
            std::fs::write(&p, text)
                .map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Outcome {
                stdout: String::new(),
                code: EXIT_OK,
            })
        }
    }
}

fn flag_pair(
    flag: &Option<Vec<f64>>,
    cfg: &ConfigFile,
    key: &str,
) -> Result<Option<(f64, f64)>, CliError> {
    match flag {
        Some(v) => Ok(Some((v[0], v[1]))),
        None => cfg.pair(key),
    }
}

fn required(flag: Option<f64>, cfg: &ConfigFile, key: &str) -> Result<f64, CliError> {
    match flag {
        Some(v) => Ok(v),
        None => cfg
            .number(key)?
            .ok_or_else(|| CliError::invalid(format!("missing required value --{key}"))),
    }
}

pub fn resolve_stats(a: &SpecArgs, cfg: &ConfigFile) -> Result<SummaryStats, CliError> {
    let rho_xy = required(a.rho_xy, cfg, "rho-xy")?;
    let sigma_ratio = required(a.sigma_ratio, cfg, "sigma-ratio")?;
    Ok(SummaryStats::new(rho_xy, sigma_ratio)?)
}

pub fn resolve_spec(a: &SpecArgs, cfg: &ConfigFile) -> Result<BoundSpec, CliError> {
    let r2x = flag_pair(&a.r2x, cfg, "r2x")?.unwrap_or(DEFAULT_R2);
    let r2y = flag_pair(&a.r2y, cfg, "r2y")?.unwrap_or(DEFAULT_R2);
    let rho = flag_pair(&a.rho_hxhy, cfg, "rho-hxhy")?.unwrap_or(DEFAULT_RHO);
    Ok(BoundSpec::new(r2x, r2y, rho)?)
}

fn tuple_json(t: &SensitivityTuple) -> Value {
    json!({
        "r2wx": json_number(t.r2wx),
        "r2wy": json_number(t.r2wy),
        "rho_hxhy": json_number(t.rho_hxhy),
    })
}

fn tuple_human(t: &SensitivityTuple) -> String {
    format!(
        "r2x={} r2y={} rho-hxhy={}",
        human(t.r2wx),
        human(t.r2wy),
        human(t.rho_hxhy)
    )
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable report") + "\n"
}

pub fn interval(a: &SpecArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.output.config.as_deref())?;
    let stats = resolve_stats(a, &cfg)?;
    let spec = resolve_spec(a, &cfg)?;
    let fmt = output_format(&a.output, &cfg)?;
    let (iv, set) = solve_with_candidates(&stats, &spec)?;
    let mut families: BTreeMap<&str, u64> = BTreeMap::new();
    for c in &set.candidates {
        *families.entry(c.family.name()).or_default() += 1;
    }
    let distinct = set.candidates.len() as u64;

    let text = match fmt {
        Format::Json => {
            let fam: Map<String, Value> = families
                .iter()
                .map(|(k, v)| (k.to_string(), Value::from(*v)))
                .collect();
            pretty(&json!({
                "lower": json_number(iv.lower),
                "upper": json_number(iv.upper),
                "argmin": tuple_json(&iv.argmin_tuple),
                "argmax": tuple_json(&iv.argmax_tuple),
                "candidates": {
                    "generated": set.generated,
                    "feasible": set.feasible,
                    "distinct": distinct,
                    "families": fam,
                },
            }))
        }
        Format::Csv => {
            let mut t = Table::new(&[
                "lower",
                "upper",
                "argmin_r2wx",
                "argmin_r2wy",
                "argmin_rho_hxhy",
                "argmax_r2wx",
                "argmax_r2wy",
                "argmax_rho_hxhy",
                "generated",
                "feasible",
                "distinct",
            ]);
            let (lo, hi) = (iv.argmin_tuple, iv.argmax_tuple);
            t.rows.push(vec![
                Cell::Num(iv.lower),
                Cell::Num(iv.upper),
                Cell::Num(lo.r2wx),
                Cell::Num(lo.r2wy),
                Cell::Num(lo.rho_hxhy),
                Cell::Num(hi.r2wx),
                Cell::Num(hi.r2wy),
                Cell::Num(hi.rho_hxhy),
                Cell::Int(set.generated as u64),
                Cell::Int(set.feasible as u64),
                Cell::Int(distinct),
            ]);
            t.csv()
        }
        Format::Table => {
            let mut out = format!(
                "interval       [{}, {}]\n",
                human(iv.lower),
                human(iv.upper)
            );
            out += &format!("lower witness  {}\n", tuple_human(&iv.argmin_tuple));
            out += &format!("upper witness  {}\n", tuple_human(&iv.argmax_tuple));
            out += &format!(
                "candidates     {distinct} distinct, {} feasible, {} generated\n",
                set.feasible, set.generated
            );
            for (name, count) in &families {
                out += &format!("  {name:<22} {count}\n");
            }
            out
        }
    };
    deliver(text, &a.output, &cfg)
}

/// `steps` points from `lo` to `hi`; both ends exact.
fn lattice(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

pub fn sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.spec.output.config.as_deref())?;
    let stats = resolve_stats(&a.spec, &cfg)?;
    let base = resolve_spec(&a.spec, &cfg)?;
    let fmt = output_format(&a.spec.output, &cfg)?;
    let steps = match a.steps {
        Some(s) => s,
        None => cfg.number("steps")?.unwrap_or(DEFAULT_STEPS),
    };
    if steps < 2 {
        return Err(CliError::invalid(format!(
            "steps: need at least 2, got {steps}"
        )));
    }
    let values = lattice(base.l_rho, base.u_rho, steps);
    let mut t = Table::new(&["l_rho", "u_rho", "lower", "upper", "status"]);
    for (i, &lo) in values.iter().enumerate() {
        for &hi in &values[i..] {
            let spec = BoundSpec {
                l_rho: lo,
                u_rho: hi,
                ..base
            };
            let (lower, upper, status) = match solve_with_candidates(&stats, &spec) {
                Ok((iv, _)) => (Cell::Num(iv.lower), Cell::Num(iv.upper), "ok"),
                Err(Error::EmptyFeasibleSet(_)) => (Cell::Missing, Cell::Missing, "empty"),
                Err(e) => return Err(e.into()),
            };
            t.rows.push(vec![
                Cell::Num(lo),
                Cell::Num(hi),
                lower,
                upper,
                Cell::Text(status.into()),
            ]);
        }
    }
    let text = match fmt {
        Format::Table => t.text(),
        Format::Csv => t.csv(),
        Format::Json => pretty(&t.json_rows()),
    };
    deliver(text, &a.spec.output, &cfg)
}

fn parse_field(raw: &str, line: u64, column: &str) -> Result<f64, CliError> {
    let trimmed = raw.trim();
    match trimmed.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(CliError::invalid(format!(
            "line {line}, column '{column}': expected a finite number, got '{trimmed}'"
        ))),
    }
}

/// Reads a dataset; `x` and `y` are required, every other column is a
/// confounder in header order.
pub fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::invalid(format!("{}: bad header: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::invalid(format!("header is missing column '{name}'")))
    };
    let ix = find("x")?;
    let iy = find("y")?;
    let iw: Vec<usize> = (0..headers.len()).filter(|&j| j != ix && j != iy).collect();

    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut w: Vec<Vec<f64>> = vec![Vec::new(); iw.len()];
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::invalid(format!("line {line}: malformed record: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        x.push(parse_field(&rec[ix], line, "x")?);
        y.push(parse_field(&rec[iy], line, "y")?);
        for (col, &j) in w.iter_mut().zip(&iw) {
            col.push(parse_field(&rec[j], line, &headers[j])?);
        }
    }
    Ok(Dataset::new(x, y, w)?)
}

pub fn from_data(a: &DataArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.output.config.as_deref())?;
    let fmt = output_format(&a.output, &cfg)?;
    let d = read_dataset(&a.input)?;
    let s = summarize(&d)?;

    let mut record: Vec<(&str, Cell)> = vec![
        ("n", Cell::Int(d.n() as u64)),
        ("p", Cell::Int(d.p() as u64)),
        ("rho_xy", Cell::Num(s.stats.rho_xy)),
        ("sigma_ratio", Cell::Num(s.stats.sigma_ratio)),
        ("sigma_x", Cell::Num(s.sigma_x)),
        ("sigma_y", Cell::Num(s.sigma_y)),
    ];
    if d.p() > 0 {
        record.push(("r2wx", Cell::Num(s.tuple.r2wx)));
        record.push(("r2wy", Cell::Num(s.tuple.r2wy)));
        record.push(("rho_hxhy", Cell::Num(s.tuple.rho_hxhy)));
        record.push(("degenerate_fit", Cell::Text(s.degenerate_fit.to_string())));
        if d.n() > d.p() + 2 {
            let ols = ols_beta(&d)?;
            let formula = beta_adjusted(&s.stats, &s.tuple)?;
            record.push(("ols_beta", Cell::Num(ols)));
            record.push(("formula_beta", Cell::Num(formula)));
            record.push(("discrepancy", Cell::Num((ols - formula).abs())));
        }
    }
    deliver(render_record(&record, fmt), &a.output, &cfg)
}

fn render_record(record: &[(&str, Cell)], fmt: Format) -> String {
    match fmt {
        Format::Json => {
            let obj: Map<String, Value> = record
                .iter()
                .map(|(k, v)| (k.to_string(), v.json()))
                .collect();
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let mut t = Table::new(&record.iter().map(|(k, _)| *k).collect::<Vec<_>>());
            t.rows.push(record.iter().map(|(_, v)| v.clone()).collect());
            t.csv()
        }
        Format::Table => {
            let w = record.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            record
                .iter()
                .map(|(k, v)| format!("{k:<w$}  {}\n", v.human()))
                .collect()
        }
    }
}

pub fn region(a: &RegionArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.spec.output.config.as_deref())?;
    let stats = resolve_stats(&a.spec, &cfg)?;
    let spec = resolve_spec(&a.spec, &cfg)?;
    let fmt = output_format(&a.spec.output, &cfg)?;
    let (lo, hi) = flag_pair(&a.exclude, &cfg, "exclude")?
        .ok_or_else(|| CliError::invalid("missing required value --exclude"))?;
    let sig = SignificanceRange::new(lo, hi)?;
    let resolution = match a.resolution {
        Some(r) => r,
        None => cfg
            .number("resolution")?
            .unwrap_or(DEFAULT_REGION_RESOLUTION),
    };
    let cloud = necessary_region(
        &stats,
        &spec,
        &sig,
        &GridConfig::with_resolution(resolution),
    )?;
    let mut t = Table::new(&["r2wx", "r2wy", "rho_hxhy", "beta"]);
    for pt in &cloud {
        t.rows.push(vec![
            Cell::Num(pt.tuple.r2wx),
            Cell::Num(pt.tuple.r2wy),
            Cell::Num(pt.tuple.rho_hxhy),
            Cell::Num(pt.beta),
        ]);
    }
    let text = match fmt {
        Format::Table => t.text(),
        Format::Csv => t.csv(),
        Format::Json => pretty(&t.json_rows()),
    };
    deliver(text, &a.spec.output, &cfg)
}

/// `uniform`, `beta:A:B` or `point:V`.
pub fn parse_marginal(flag: &str, text: &str) -> Result<Marginal, CliError> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::invalid(format!("{flag}: cannot parse '{s}' as a number")))
    };
    match parts.as_slice() {
        ["uniform"] => Ok(Marginal::Uniform),
        ["beta", a, b] => Ok(Marginal::Beta {
            alpha: num(a)?,
            beta: num(b)?,
        }),
        ["point", v] => Ok(Marginal::PointMass { value: num(v)? }),
        _ => Err(CliError::invalid(format!(
            "{flag}: expected uniform, beta:A:B or point:V, got '{text}'"
        ))),
    }
}

pub fn prior(a: &PriorArgs) -> Result<Outcome, CliError> {
    let cfg = load_config(a.spec.output.config.as_deref())?;
    let stats = resolve_stats(&a.spec, &cfg)?;
    let spec = resolve_spec(&a.spec, &cfg)?;
    let fmt = output_format(&a.spec.output, &cfg)?;
    let samples = match a.samples {
        Some(n) => n,
        None => cfg.number("samples")?.unwrap_or(DEFAULT_SAMPLES),
    };
    let seed = match a.seed {
        Some(s) => s,
        None => cfg.number("seed")?.unwrap_or(0),
    };
    let marginal = |flag: &str, v: &Option<String>| match v {
        None => Ok(Marginal::Uniform),
        Some(t) => parse_marginal(flag, t),
    };
    let prior = PriorSpec {
        r2wx: marginal("prior-x2", &a.prior_x2)?,
        r2wy: marginal("prior-y2", &a.prior_y2)?,
        rho_hxhy: marginal("prior-rho", &a.prior_rho)?,
        sample_count: samples,
        seed,
    };
    let res = propagate_prior(&stats, &spec, &prior)?;
    let q = res.quantiles;
    let record: Vec<(&str, Cell)> = vec![
        ("samples", Cell::Int(res.samples.len() as u64)),
        ("draws", Cell::Int(res.draws as u64)),
        ("acceptance_rate", Cell::Num(res.acceptance_rate)),
        ("min", Cell::Num(res.min)),
        ("q025", Cell::Num(q.q025)),
        ("q25", Cell::Num(q.q25)),
        ("q50", Cell::Num(q.q50)),
        ("q75", Cell::Num(q.q75)),
        ("q975", Cell::Num(q.q975)),
        ("max", Cell::Num(res.max)),
    ];
    let text = if a.emit_samples {
        match fmt {
            Format::Json => {
                let mut obj: Map<String, Value> = record
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.json()))
                    .collect();
                obj.insert(
                    "values".into(),
                    Value::Array(res.samples.iter().map(|&b| json_number(b)).collect()),
                );
                pretty(&Value::Object(obj))
            }
            _ => {
                let mut t = Table::new(&["beta"]);
                t.rows = res.samples.iter().map(|&b| vec![Cell::Num(b)]).collect();
                if fmt == Format::Csv {
                    t.csv()
                } else {
                    t.text()
                }
            }
        }
    } else {
        render_record(&record, fmt)
    };
    deliver(text, &a.spec.output, &cfg)
}

/// Interval rounded to the two decimals used in human tables.
pub fn rounded_interval(iv: &ConfoundingInterval) -> (f64, f64) {
    (
        (iv.lower * 100.0).round() / 100.0,
        (iv.upper * 100.0).round() / 100.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_hits_zero_and_ends() {
        let v = lattice(-1.0, 1.0, 21);
        assert_eq!(v[0], -1.0);
        assert_eq!(v[10], 0.0);
        assert_eq!(v[20], 1.0);
    }

    #[test]
    fn marginal_syntax() {
        assert_eq!(parse_marginal("m", "uniform").unwrap(), Marginal::Uniform);
        assert_eq!(
            parse_marginal("m", "beta:2:5").unwrap(),
            Marginal::Beta {
                alpha: 2.0,
                beta: 5.0
            }
        );
        assert_eq!(
            parse_marginal("m", "point:0.3").unwrap(),
            Marginal::PointMass { value: 0.3 }
        );
        assert!(parse_marginal("m", "gamma:1").is_err());
        assert!(parse_marginal("m", "beta:x:1").is_err());
    }

    #[test]
    fn table_csv_quotes_and_blanks() {
        let mut t = Table::new(&["a", "b"]);
        t.rows.push(vec![Cell::Num(0.5), Cell::Missing]);
        t.rows.push(vec![Cell::Text("x,y".into()), Cell::Int(3)]);
        assert_eq!(t.csv(), "a,b\n0.5,\n\"x,y\",3\n");
    }
}
