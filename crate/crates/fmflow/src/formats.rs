//! On-disk formats: JSONL atom snapshots and the CSV/JSONL tables.
//!
//! Every table starts with a reference to the run manifest: a
//! `# manifest=<hash>` comment line for CSV, a header object for JSONL.

use std::io::{BufRead, Write};

use fmflow_core::dynamics::{DiagRecord, Outcome};
use fmflow_core::{Atom, SpectralMeasure, C64};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Jsonl,
}

impl TableFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Jsonl => "jsonl",
        }
    }
}

/// A header plus rows of numbers or strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // NaN/inf are not JSON numbers; keep them as strings.
            Cell::Num(x) if !x.is_finite() => Value::String(fmt_f64(*x)),
            Cell::Num(x) => json!(x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Shortest round-trip representation; `NaN`, `inf`, `-inf` otherwise.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:?}")
    }
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn write<W: Write>(&self, mut w: W, format: TableFormat, manifest: &str) -> std::io::Result<()> {
        match format {
            TableFormat::Csv => {
                writeln!(w, "# manifest={manifest}")?;
                writeln!(w, "{}", self.columns.join(","))?;
                for r in &self.rows {
                    let cells: Vec<String> = r.iter().map(Cell::csv).collect();
                    writeln!(w, "{}", cells.join(","))?;
                }
            }
            TableFormat::Jsonl => {
                writeln!(w, "{}", json!({ "manifest": manifest, "columns": self.columns }))?;
                for r in &self.rows {
                    let obj: serde_json::Map<String, Value> =
                        self.columns.iter().zip(r).map(|(c, v)| (c.to_string(), v.json())).collect();
                    writeln!(w, "{}", Value::Object(obj))?;
                }
            }
        }
        Ok(())
    }
}

pub fn diagnostics_table(records: &[DiagRecord], outcome: &Outcome) -> Table {
    let mut t = Table::new(vec!["t", "fm_norm", "fm4_norm", "atom_count", "sup_sample", "outcome"]);
    let last = records.len().saturating_sub(1);
    for (i, r) in records.iter().enumerate() {
        let o = if i == last { outcome.as_str() } else { "running" };
        t.rows.push(vec![
            Cell::Num(r.t),
            Cell::Num(r.fm_norm),
            Cell::Num(r.fm4_norm),
            Cell::Int(r.atom_count as u64),
            Cell::Num(r.sup_sample),
            Cell::Text(o.into()),
        ]);
    }
    t
}

/// Header record of a JSONL snapshot block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub t: f64,
    pub flags: Vec<String>,
    pub components: usize,
    pub atoms: usize,
    #[serde(default)]
    pub origin_policy: String,
    #[serde(default)]
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AtomRecord {
    xi: Vec<f64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

fn flag_names(u: &SpectralMeasure) -> Vec<String> {
    let f = u.flags;
    [(f.real_field, "real_field"), (f.zero_free, "zero_free"), (f.solenoidal, "solenoidal")]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, s)| s.to_string())
        .collect()
}

/// Appends one snapshot block (header + atoms) to `w`.
pub fn write_snapshot<W: Write>(
    mut w: W,
    u: &SpectralMeasure,
    t: f64,
    origin_policy: &str,
    manifest: &str,
) -> std::io::Result<()> {
    let header = SnapshotHeader {
        n: u.dim(),
        t,
        flags: flag_names(u),
        components: u.components(),
        atoms: u.len(),
        origin_policy: origin_policy.into(),
        manifest: manifest.into(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).map_err(std::io::Error::other)?)?;
    for a in u.atoms() {
        let rec = AtomRecord {
            xi: a.xi().to_vec(),
            re: a.coeff().iter().map(|z| z.re).collect(),
            im: a.coeff().iter().map(|z| z.im).collect(),
        };
        writeln!(w, "{}", serde_json::to_string(&rec).map_err(std::io::Error::other)?)?;
    }
    Ok(())
}

/// Reads every snapshot block from a JSONL stream.
pub fn read_snapshots<R: BufRead>(r: R) -> Result<Vec<(SnapshotHeader, SpectralMeasure)>, CliError> {
    let bad = |m: String| CliError::Config(format!("snapshot: {m}"));
    let mut out = Vec::new();
    let mut lines = r.lines();
    while let Some(line) = lines.next() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let header: SnapshotHeader = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let mut atoms = Vec::with_capacity(header.atoms);
        for _ in 0..header.atoms {
            let l = lines.next().ok_or_else(|| bad("truncated atom list".into()))??;
            let rec: AtomRecord = serde_json::from_str(&l).map_err(|e| bad(e.to_string()))?;
            if rec.re.len() != rec.im.len() {
                return Err(bad("re/im length mismatch".into()));
            }
            let c: Vec<C64> = rec.re.iter().zip(&rec.im).map(|(a, b)| C64::new(*a, *b)).collect();
            atoms.push(Atom::new(&rec.xi, &c)?);
        }
        let mut u = SpectralMeasure::from_atoms_in(header.n, header.components, atoms)?;
        let claimed = &header.flags;
        u.flags.real_field = claimed.iter().any(|f| f == "real_field");
        u.flags.zero_free = claimed.iter().any(|f| f == "zero_free");
        u.flags.solenoidal = claimed.iter().any(|f| f == "solenoidal");
        if !u.check_flags() {
            return Err(bad("claimed flags do not hold".into()));
        }
        out.push((header, u));
    }
    Ok(out)
}

/// Manifest hash referenced by a CSV/JSONL output or a grid snapshot, if any.
pub fn referenced_manifest(text_head: &str) -> Option<String> {
    let first = text_head.lines().find(|l| !l.trim().is_empty())?;
    if let Some(h) = first.strip_prefix("# manifest=") {
        return Some(h.trim().to_string());
    }
    if let Ok(v) = serde_json::from_str::<Value>(first) {
        return v.get("manifest").and_then(|m| m.as_str()).map(str::to_string);
    }
    text_head.lines().find_map(|l| l.strip_prefix("manifest=").map(|h| h.trim().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_roundtrip() {
        let u = SpectralMeasure::from_atoms(vec![
            Atom::new(&[0.5, 0.0], &[C64::new(0.0, 0.0), C64::new(0.1, 0.2)]).unwrap(),
            Atom::new(&[-0.5, 0.0], &[C64::new(0.0, 0.0), C64::new(0.1, -0.2)]).unwrap(),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &u, 0.0, "drop", "h").unwrap();
        write_snapshot(&mut buf, &u, 1.5, "drop", "h").unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(r#"{"n":2,"t":0.0,"flags":["real_field","zero_free","solenoidal"]"#), "{text}");
        assert!(text.contains(r#"{"xi":[-0.5,0.0],"re":[0.0,0.1],"im":[0.0,-0.2]}"#));
        let back = read_snapshots(&buf[..]).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].0.t, 1.5);
        assert_eq!(back[1].1, u);
        assert_eq!(referenced_manifest(&text).as_deref(), Some("h"));
    }

    #[test]
    fn false_flags_rejected() {
        let text = "{\"n\":2,\"t\":0.0,\"flags\":[\"real_field\"],\"components\":2,\"atoms\":1}\n\
                    {\"xi\":[0.5,0.0],\"re\":[0.0,1.0],\"im\":[0.0,0.0]}\n";
        assert!(read_snapshots(text.as_bytes()).is_err());
    }

    #[test]
    fn tables() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec![Cell::Num(0.1), Cell::Text("x".into())]);
        t.rows.push(vec![Cell::Num(f64::NAN), Cell::Int(3)]);
        let mut csv = Vec::new();
        t.write(&mut csv, TableFormat::Csv, "abc").unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "# manifest=abc\na,b\n0.1,x\nNaN,3\n");
        let mut js = Vec::new();
        t.write(&mut js, TableFormat::Jsonl, "abc").unwrap();
        let s = String::from_utf8(js).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), r#"{"a":0.1,"b":"x"}"#);
        assert_eq!(referenced_manifest(&s).as_deref(), Some("abc"));
    }
}
