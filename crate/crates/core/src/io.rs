//! CSV ingestion and export.
//!
//! Edge lists use the header `source,target[,count]` (missing count means 1);
//! group files use `node,group`. Lines starting with `#` are comments.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{build_graph, LabeledDigraph};

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input)
}

fn parse_error(origin: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error(origin: &str, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    parse_error(origin, line, err.to_string())
}

/// Parses a group assignment CSV into `(node, group)` pairs, in file order.
pub fn read_groups<R: Read>(input: R, origin: &str) -> Result<Vec<(String, String)>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
    if headers.len() != 2 || &headers[0] != "node" || &headers[1] != "group" {
        return Err(parse_error(origin, 1, "expected header `node,group`"));
    }
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(parse_error(
                origin,
                line,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        if record[0].is_empty() || record[1].is_empty() {
            return Err(parse_error(origin, line, "empty node or group"));
        }
        out.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(out)
}

/// Parses an edge-list CSV into `(source, target, count)` triples.
///
/// `known_nodes`, when given, turns an unknown endpoint into a parse error
/// carrying the offending line.
pub fn read_edges<R: Read>(
    input: R,
    origin: &str,
    known_nodes: Option<&HashSet<&str>>,
) -> Result<Vec<(String, String, u64)>> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(|e| csv_error(origin, e))?.clone();
    let with_count = match headers.len() {
        2 if &headers[0] == "source" && &headers[1] == "target" => false,
        3 if &headers[0] == "source" && &headers[1] == "target" && &headers[2] == "count" => true,
        _ => {
            return Err(parse_error(
                origin,
                1,
                "expected header `source,target[,count]`",
            ))
        }
    };
    let width = if with_count { 3 } else { 2 };
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(origin, e))?;
        let line = record_line(&record);
        if record.len() != width {
            return Err(parse_error(
                origin,
                line,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        let (source, target) = (&record[0], &record[1]);
        if let Some(known) = known_nodes {
            for node in [source, target] {
                if !known.contains(node) {
                    return Err(parse_error(origin, line, format!("unknown node {node}")));
                }
            }
        }
        let count = if with_count {
            let raw: i64 = record[2].parse().map_err(|_| {
                parse_error(origin, line, format!("invalid count `{}`", &record[2]))
            })?;
            if raw <= 0 {
                return Err(parse_error(
                    origin,
                    line,
                    format!("non-positive multiplicity {raw}"),
                ));
            }
            raw as u64
        } else {
            1
        };
        out.push((source.to_string(), target.to_string(), count));
    }
    Ok(out)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads a graph from an edge-list CSV and a group CSV.
pub fn load_graph(edges_path: &Path, groups_path: &Path) -> Result<LabeledDigraph> {
    let groups = read_groups(open(groups_path)?, &groups_path.display().to_string())?;
    let known: HashSet<&str> = groups.iter().map(|(n, _)| n.as_str()).collect();
    let edges = read_edges(
        open(edges_path)?,
        &edges_path.display().to_string(),
        Some(&known),
    )?;
    build_graph(&edges, &groups)
}

/// Writes `source,target,count` rows using original node ids.
pub fn write_edges<W: Write>(g: &LabeledDigraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ids = g.space().node_ids();
    let io = |e: csv::Error| Error::Io {
        path: "<edges>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(["source", "target", "count"]).map_err(io)?;
    for e in g.edges() {
        w.write_record([&ids[e.source], &ids[e.target], &e.count.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<edges>".into(),
        source,
    })
}

/// Writes `node,group` rows.
pub fn write_groups<W: Write>(g: &LabeledDigraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let space = g.space();
    let io = |e: csv::Error| Error::Io {
        path: "<groups>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(["node", "group"]).map_err(io)?;
    for (i, id) in space.node_ids().iter().enumerate() {
        w.write_record([id, &space.group_labels()[space.group_of(i)]])
            .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<groups>".into(),
        source,
    })
}
