//! File formats: JSON networks and fits, CSV patterns, curves, envelopes
//! and study tables. All writers go through [`write_atomic`].

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::envelopes::{CurveSet, EnvelopeResult};
use crate::error::{Error, Result};
use crate::estimation::{Estimator, StudyRow, StudyTable};
use crate::network::{EdgeSpec, LinearNetwork, NetworkPoint, PointPattern, Vertex};
use crate::summaries::{CurveKind, CurveMeta, KernelIntensity, SummaryCurve};

/// Writes to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} {field:?}")))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &[&str]) -> Result<()> {
    let h = rdr.headers().map_err(csv_err)?;
    if h.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse(format!(
            "expected columns {}, found {}",
            expected.join(","),
            h.iter().collect::<Vec<_>>().join(",")
        )));
    }
    Ok(())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRecord {
    id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    units: String,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeSpec>,
}

pub fn network_to_json(net: &LinearNetwork) -> String {
    let file = NetworkFile {
        units: "um".into(),
        vertices: net
            .vertices()
            .iter()
            .map(|v| VertexRecord {
                id: v.id,
                x: v.x,
                y: v.y,
            })
            .collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeSpec {
                id: e.id,
                from: net.vertices()[e.from].id,
                to: net.vertices()[e.to].id,
                length: e.length,
                branch: e.branch,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("network serialises")
}

/// Parses a network file; only trees measured in µm are accepted.
pub fn network_from_json(text: &str) -> Result<LinearNetwork> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.units != "um" {
        return Err(Error::Units(file.units));
    }
    let vertices = file
        .vertices
        .into_iter()
        .map(|v| Vertex {
            id: v.id,
            x: v.x,
            y: v.y,
        })
        .collect();
    let net = LinearNetwork::new(vertices, file.edges)?;
    if !net.is_tree() {
        return Err(Error::NotATree);
    }
    Ok(net)
}

pub fn load_network(path: &Path) -> Result<LinearNetwork> {
    network_from_json(&read(path)?)
}

pub fn save_network(net: &LinearNetwork, path: &Path) -> Result<()> {
    write_atomic(path, network_to_json(net).as_bytes())
}

/// `edge,offset` with edge ids.
pub fn pattern_to_csv(pattern: &PointPattern) -> Result<String> {
    let net = pattern.network();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["edge", "offset"]).map_err(csv_err)?;
    for p in pattern.points() {
        w.write_record([net.edge(p.edge).id.to_string(), p.offset.to_string()])
            .map_err(csv_err)?;
    }
    finish(w)
}

pub fn pattern_from_csv(net: Arc<LinearNetwork>, text: &str) -> Result<PointPattern> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, &["edge", "offset"])?;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let id: u64 = rec[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad edge id {:?}", &rec[0])))?;
        points.push(net.point_by_id(id, parse_f64(&rec[1], "offset")?)?);
    }
    PointPattern::new(net, points)
}

pub fn load_pattern(net: Arc<LinearNetwork>, path: &Path) -> Result<PointPattern> {
    pattern_from_csv(net, &read(path)?)
}

pub fn save_pattern(pattern: &PointPattern, path: &Path) -> Result<()> {
    write_atomic(path, pattern_to_csv(pattern)?.as_bytes())
}

/// `kind,r,value,defined`; undefined cells have an empty value.
pub fn curves_to_csv(curves: &[&SummaryCurve]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "r", "value", "defined"])
        .map_err(csv_err)?;
    for c in curves {
        for (r, v) in c.r.iter().zip(&c.values) {
            w.write_record([
                c.kind.label().to_string(),
                r.to_string(),
                opt(*v),
                v.is_some().to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    finish(w)
}

/// Reads curves back; consecutive rows of one kind form a curve.
pub fn curves_from_csv(text: &str) -> Result<Vec<SummaryCurve>> {
    let mut rdr = csv_reader(text);
    check_header(&mut rdr, &["kind", "r", "value", "defined"])?;
    let mut out: Vec<SummaryCurve> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let kind = CurveKind::parse(&rec[0])?;
        let r = parse_f64(&rec[1], "r")?;
        let defined: bool = rec[3]
            .parse()
            .map_err(|_| Error::Parse(format!("bad defined flag {:?}", &rec[3])))?;
        let value = if defined {
            Some(parse_f64(&rec[2], "value")?)
        } else {
            None
        };
        match out.last_mut() {
            Some(c) if c.kind == kind => {
                c.r.push(r);
                c.values.push(value);
            }
            _ => out.push(SummaryCurve::new(
                kind,
                vec![r],
                vec![value],
                CurveMeta::default(),
            )),
        }
    }
    Ok(out)
}

/// `segment,r,data,lower,upper`.
pub fn envelope_to_csv(curves: &CurveSet, result: &EnvelopeResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["segment", "r", "data", "lower", "upper"])
        .map_err(csv_err)?;
    let d = &curves.data;
    for i in 0..d.len() {
        w.write_record([
            d.labels[i].label().to_string(),
            d.r[i].to_string(),
            opt(d.values[i]),
            opt(result.lower[i]),
            opt(result.upper[i]),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// Summary written next to an envelope table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSidecar {
    pub p_liberal: f64,
    pub p_conservative: f64,
    pub alpha: f64,
    pub critical_rank: usize,
    pub data_rank: usize,
    pub sims: usize,
}

impl EnvelopeSidecar {
    pub fn new(result: &EnvelopeResult) -> Self {
        Self {
            p_liberal: result.p_liberal,
            p_conservative: result.p_conservative,
            alpha: result.alpha,
            critical_rank: result.critical_rank,
            data_rank: result.ranks[0],
            sims: result.ranks.len() - 1,
        }
    }
}

/// `run,replicate,method,sigma2_hat,beta_hat,converged`.
pub fn study_to_csv(table: &StudyTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "run",
        "replicate",
        "method",
        "sigma2_hat",
        "beta_hat",
        "converged",
    ])
    .map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            r.run.to_string(),
            r.replicate.to_string(),
            r.method.name().to_string(),
            r.sigma2_hat.to_string(),
            r.beta_hat.to_string(),
            r.converged.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn study_from_csv(text: &str) -> Result<Vec<StudyRow>> {
    let mut rdr = csv_reader(text);
    check_header(
        &mut rdr,
        &[
            "run",
            "replicate",
            "method",
            "sigma2_hat",
            "beta_hat",
            "converged",
        ],
    )?;
    let bad = |what: &str, v: &str| Error::Parse(format!("bad {what} {v:?}"));
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let method: Estimator =
                serde_json::from_value(serde_json::Value::String(rec[2].into()))
                    .map_err(|_| bad("method", &rec[2]))?;
            Ok(StudyRow {
                run: rec[0].parse().map_err(|_| bad("run", &rec[0]))?,
                replicate: rec[1].parse().map_err(|_| bad("replicate", &rec[1]))?,
                method,
                sigma2_hat: parse_f64(&rec[3], "sigma2_hat")?,
                beta_hat: parse_f64(&rec[4], "beta_hat")?,
                converged: rec[5].parse().map_err(|_| bad("converged", &rec[5]))?,
            })
        })
        .collect()
}

/// `edge,offset,pi` for a field on lattice sites.
pub fn pi_grid_to_csv(net: &LinearNetwork, sites: &[NetworkPoint], pi: &[f64]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["edge", "offset", "pi"]).map_err(csv_err)?;
    for (p, v) in sites.iter().zip(pi) {
        w.write_record([
            net.edge(p.edge).id.to_string(),
            p.offset.to_string(),
            v.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

/// `edge,offset,intensity`.
pub fn kernel_intensity_to_csv(net: &LinearNetwork, est: &KernelIntensity) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["edge", "offset", "intensity"])
        .map_err(csv_err)?;
    for (e, c) in net.edges().iter().zip(&est.edges) {
        for (r, v) in c.r.iter().zip(&c.values) {
            w.write_record([e.id.to_string(), r.to_string(), opt(*v)])
                .map_err(csv_err)?;
        }
    }
    finish(w)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serialises")
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::test_nets::*;

    #[test]
    fn network_round_trip() {
        let net = y_tree();
        let back = network_from_json(&network_to_json(&net)).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn rejects_units_and_cycles() {
        let text = network_to_json(&segment(3.0)).replace("\"um\"", "\"mm\"");
        assert!(matches!(network_from_json(&text), Err(Error::Units(_))));
        let tri = LinearNetwork::new(
            vertices(3),
            vec![
                spec(0, 0, 1, 1.0, crate::Branch::Main),
                spec(1, 1, 2, 1.0, crate::Branch::Main),
                spec(2, 2, 0, 1.0, crate::Branch::Main),
            ],
        )
        .unwrap();
        assert!(matches!(
            network_from_json(&network_to_json(&tri)),
            Err(Error::NotATree)
        ));
        assert!(network_from_json("{").is_err());
    }

    #[test]
    fn pattern_round_trip() {
        let net = Arc::new(y_tree());
        let pts = vec![
            net.point(0, 0.1).unwrap(),
            net.point(2, 1.0 / 3.0).unwrap(),
            net.vertex_point(0),
        ];
        let x = PointPattern::new(net.clone(), pts).unwrap();
        let back = pattern_from_csv(net.clone(), &pattern_to_csv(&x).unwrap()).unwrap();
        assert_eq!(back.points(), x.points());
        assert!(pattern_from_csv(net.clone(), "edge,offset\n0,99\n").is_err());
        assert!(pattern_from_csv(net, "e,o\n0,1\n").is_err());
    }

    #[test]
    fn curves_round_trip() {
        let a = SummaryCurve::new(
            CurveKind::F,
            vec![0.0, 0.5],
            vec![Some(0.25), None],
            CurveMeta::default(),
        );
        let b = SummaryCurve::new(
            CurveKind::J,
            vec![0.0],
            vec![Some(1.0)],
            CurveMeta::default(),
        );
        let back = curves_from_csv(&curves_to_csv(&[&a, &b]).unwrap()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn study_round_trip() {
        let table = StudyTable {
            rows: vec![StudyRow {
                run: 1,
                replicate: 3,
                method: Estimator::MceK,
                sigma2_hat: 4.5,
                beta_hat: f64::NAN,
                converged: false,
            }],
            summaries: Vec::new(),
        };
        let back = study_from_csv(&study_to_csv(&table).unwrap()).unwrap();
        assert_eq!(back[0].method, Estimator::MceK);
        assert!(back[0].beta_hat.is_nan());
        assert_eq!(back[0].sigma2_hat, 4.5);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
