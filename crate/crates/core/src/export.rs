//! Plot-ready output formats: weighted matrices, backbone edge lists,
//! GraphML, curve tables, activity reports and provenance records.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backbone::Backbone;
use crate::error::{Error, Result};
use crate::ingest::sha256_hex;
use crate::model::{ActivityTimeline, Adjacency, BinaryNetwork, Roster, WeightedNetwork};
use crate::stats::ResamplingCurve;

/// Write via a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Render into a buffer with `f`, then write atomically.
pub fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

/// Header of participant names, then one row of six-decimal weights each.
pub fn write_matrix<W: Write>(writer: W, net: &WeightedNetwork) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(net.roster())?;
    let n = net.n();
    for i in 0..n {
        w.write_record((0..n).map(|j| format!("{:.6}", net.weight(i, j))))?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<matrix>"), e))?;
    Ok(())
}

pub fn read_matrix<R: Read>(reader: R, origin: &str) -> Result<WeightedNetwork> {
    let mut r = csv::Reader::from_reader(reader);
    let roster: Vec<String> = r.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let n = roster.len();
    let mut weights = Vec::with_capacity(n * n);
    let mut rows = 0;
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: line as u64,
            message,
        };
        if rec.len() != n {
            return Err(parse_err(format!("expected {n} values, found {}", rec.len())));
        }
        for cell in rec.iter() {
            let x: f64 = cell
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("not a number: {cell:?}")))?;
            weights.push(x);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: rows as u64 + 1,
            message: format!("expected {n} rows, found {rows}"),
        });
    }
    WeightedNetwork::new(roster, weights)
}

pub fn parse_matrix(path: impl AsRef<Path>) -> Result<WeightedNetwork> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_matrix(file, &path.display().to_string())
}

#[derive(Serialize)]
struct EdgeRow<'a> {
    i: &'a str,
    j: &'a str,
    alpha: f64,
    weight: f64,
}

/// Kept edges as `i,j,alpha,weight`, in selection order.
pub fn write_edge_list<W: Write>(writer: W, roster: &[String], backbone: &Backbone) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in &backbone.edges {
        w.serialize(EdgeRow {
            i: &roster[e.i],
            j: &roster[e.j],
            alpha: e.alpha,
            weight: e.weight,
        })?;
    }
    if backbone.edges.is_empty() {
        w.write_record(["i", "j", "alpha", "weight"])?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<edges>"), e))?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Undirected GraphML. Edge weights are attached when `weights` is given.
pub fn write_graphml<W: Write>(
    mut writer: W,
    net: &BinaryNetwork,
    weights: Option<&WeightedNetwork>,
) -> Result<()> {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    if weights.is_some() {
        s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    }
    s.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for name in net.roster() {
        s.push_str(&format!("    <node id=\"{}\"/>\n", xml_escape(name)));
    }
    let roster = net.roster();
    for (i, j) in net.edges() {
        let (a, b) = (xml_escape(&roster[i]), xml_escape(&roster[j]));
        match weights {
            Some(w) => s.push_str(&format!(
                "    <edge source=\"{a}\" target=\"{b}\"><data key=\"weight\">{}</data></edge>\n",
                w.weight(i, j)
            )),
            None => s.push_str(&format!("    <edge source=\"{a}\" target=\"{b}\"/>\n")),
        }
    }
    s.push_str("  </graph>\n</graphml>\n");
    writer
        .write_all(s.as_bytes())
        .map_err(|e| Error::io(Path::new("<graphml>"), e))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// `S,roster_n,repeats` then `<label>_mean,<label>_lo,<label>_hi` per reference.
/// Flagged points leave the correlation cells empty.
pub fn write_curve<W: Write>(writer: W, curve: &ResamplingCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["S".to_string(), "roster_n".into(), "repeats".into()];
    if let Some(first) = curve.points.first() {
        for b in &first.bands {
            header.push(format!("{}_mean", b.label));
            header.push(format!("{}_lo", b.label));
            header.push(format!("{}_hi", b.label));
        }
    }
    w.write_record(&header)?;
    for p in &curve.points {
        let mut row = vec![p.samples.to_string(), p.roster_n.to_string(), p.repeats.to_string()];
        for b in &p.bands {
            row.push(opt(b.mean));
            row.push(opt(b.low));
            row.push(opt(b.high));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<curve>"), e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRow {
    pub participant: String,
    pub source: String,
    pub device: String,
    pub active_bins: usize,
    pub active_fraction: f64,
}

pub fn activity_rows(roster: &Roster, source: &str, timelines: &[ActivityTimeline]) -> Vec<ActivityRow> {
    roster
        .participants()
        .iter()
        .zip(timelines)
        .map(|(p, t)| ActivityRow {
            participant: p.name.clone(),
            source: source.to_string(),
            device: t.device.to_string(),
            active_bins: t.active_count(),
            active_fraction: t.active_fraction(),
        })
        .collect()
}

pub fn write_activity<W: Write>(writer: W, rows: &[ActivityRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(["participant", "source", "device", "active_bins", "active_fraction"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<activity>"), e))?;
    Ok(())
}

pub fn read_activity<R: Read>(reader: R) -> Result<Vec<ActivityRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Enough to re-run a command: its arguments, seed, and the digests of
/// everything it read and wrote. Deliberately free of timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(command: &str, args: Vec<String>, seed: Option<u64>, config: serde_json::Value) -> Self {
        Provenance {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            seed,
            config,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn add_output(&mut self, name: &str, bytes: &[u8]) {
        self.outputs.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut json = serde_json::to_vec_pretty(self)?;
        json.push(b'\n');
        write_atomic(path, &json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::backbone_with_edge_count;
    use crate::stats::{Band, CurvePoint};
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn matrix_layout() {
        let w = WeightedNetwork::from_upper(names(3), |i, j| (i + j) as f64 / 10.0).unwrap();
        let mut buf = Vec::new();
        write_matrix(&mut buf, &w).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "p0,p1,p2\n0.000000,0.100000,0.200000\n0.100000,0.000000,0.300000\n0.200000,0.300000,0.000000\n"
        );
    }

    proptest! {
        #[test]
        fn matrix_round_trip_to_six_decimals(upper in prop::collection::vec(0.0f64..=1.0, 10)) {
            let mut it = upper.iter();
            let w = WeightedNetwork::from_upper(names(5), |_, _| *it.next().unwrap()).unwrap();
            let mut buf = Vec::new();
            write_matrix(&mut buf, &w).unwrap();
            let back = read_matrix(buf.as_slice(), "m").unwrap();
            prop_assert_eq!(back.roster(), w.roster());
            for (a, b) in back.weights().iter().zip(w.weights()) {
                prop_assert!((a - b).abs() <= 5e-7);
            }
        }
    }

    #[test]
    fn malformed_matrix_reports_line() {
        let err = read_matrix("a,b\n0,0.5\n0.5,x\n".as_bytes(), "m.csv").unwrap_err();
        assert_eq!(err.to_string(), "m.csv:3: not a number: \"x\"");
        assert!(read_matrix("a,b\n0,0.5\n0.4,0\n".as_bytes(), "m.csv").is_err());
        assert!(read_matrix("a,b\n0,0.5\n".as_bytes(), "m.csv").is_err());
    }

    #[test]
    fn edge_list_and_graphml() {
        let w = WeightedNetwork::from_upper(names(3), |i, j| if (i, j) == (0, 1) { 0.5 } else { 0.0 }).unwrap();
        let b = backbone_with_edge_count(&w, 1).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&mut buf, w.roster(), &b).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,alpha,weight\np0,p1,1.0,0.5\n");
        let mut g = Vec::new();
        write_graphml(&mut g, &b.network, Some(&w)).unwrap();
        let g = String::from_utf8(g).unwrap();
        assert_eq!(g.matches("<node ").count(), 3);
        assert!(g.contains("<edge source=\"p0\" target=\"p1\"><data key=\"weight\">0.5</data></edge>"));
        let mut empty = Vec::new();
        write_edge_list(&mut empty, w.roster(), &backbone_with_edge_count(&w, 0).unwrap()).unwrap();
        assert_eq!(empty, b"i,j,alpha,weight\n");
    }

    #[test]
    fn graphml_escapes_names() {
        let net = BinaryNetwork::from_edges(vec!["a&b".into(), "<c>".into()], &[(0, 1)]).unwrap();
        let mut g = Vec::new();
        write_graphml(&mut g, &net, None).unwrap();
        let g = String::from_utf8(g).unwrap();
        assert!(g.contains("id=\"a&amp;b\""));
        assert!(g.contains("target=\"&lt;c&gt;\""));
    }

    #[test]
    fn curve_csv() {
        let band = |m: Option<f64>| Band { label: "survey".into(), mean: m, low: m, high: m, valid: 1 };
        let curve = ResamplingCurve {
            points: vec![
                CurvePoint { samples: 10, roster_n: 21, repeats: 5, flagged: false, bands: vec![band(Some(0.25))] },
                CurvePoint { samples: 900, roster_n: 2, repeats: 5, flagged: true, bands: vec![band(None)] },
            ],
        };
        let mut buf = Vec::new();
        write_curve(&mut buf, &curve).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "S,roster_n,repeats,survey_mean,survey_lo,survey_hi\n10,21,5,0.250000,0.250000,0.250000\n900,2,5,,,\n"
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn provenance_has_no_clock() {
        let mut p = Provenance::new("estimate", vec!["--x".into()], Some(3), serde_json::json!({"k": 1}));
        p.add_output("a.csv", b"abc");
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"));
        let back: Provenance = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
