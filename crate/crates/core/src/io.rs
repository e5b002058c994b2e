//! Line-oriented topology and demand files.
//!
//! Topology grammar, one directive per line, fields separated by whitespace:
//!
//! ```text
//! node     <id> <compute>
//! vnf      <fn>
//! vnfcost  <node> <fn> <cost>      # node can host fn at cost per unit rate
//! vnfprice <node> <fn> <cost>      # node prices fn but cannot host it
//! link     <id> <from> <to> <capacity>
//! ```
//!
//! Demand grammar:
//!
//! ```text
//! demand <id> <src> <dst> <volume> <fn1,fn2,...|->
//! ```
//!
//! `#` starts a comment that runs to the end of the line. Blank lines are
//! ignored. Any extra field on a directive is an error.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ModelError, ParseError};
use crate::model::{DemandStream, GraphBuilder, NfviGraph, ServiceDemand};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TopologyFormat {
    #[default]
    Lines,
}

impl std::str::FromStr for TopologyFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lines" | "txt" | "topo" => Ok(TopologyFormat::Lines),
            other => Err(format!("unknown topology format {other:?}")),
        }
    }
}

pub fn load_topology(path: impl AsRef<Path>, format: TopologyFormat) -> Result<NfviGraph, ParseError> {
    let text = fs::read_to_string(path)?;
    match format {
        TopologyFormat::Lines => parse_topology(&text),
    }
}

pub fn load_demands(path: impl AsRef<Path>, graph: &NfviGraph) -> Result<DemandStream, ParseError> {
    let text = fs::read_to_string(path)?;
    parse_demands(&text, graph)
}

fn tokens(line: &str) -> Vec<&str> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    body.split_whitespace().collect()
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn number(tok: &str, line: usize, what: &str) -> Result<f64, ParseError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| syntax(line, format!("{what}: {tok:?} is not a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("{what}: {tok:?} is not finite")));
    }
    Ok(v)
}

fn arity(toks: &[&str], expected: usize, line: usize) -> Result<(), ParseError> {
    if toks.len() != expected {
        return Err(syntax(
            line,
            format!(
                "`{}` takes {} fields, found {}",
                toks[0],
                expected - 1,
                toks.len() - 1
            ),
        ));
    }
    Ok(())
}

pub fn parse_topology(text: &str) -> Result<NfviGraph, ParseError> {
    let mut b = GraphBuilder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some(&head) = toks.first() else { continue };
        match head {
            "node" => {
                arity(&toks, 3, line)?;
                b.node(toks[1], number(toks[2], line, "compute capacity")?);
            }
            "vnf" => {
                arity(&toks, 2, line)?;
                b.vnf(toks[1]);
            }
            "vnfcost" => {
                arity(&toks, 4, line)?;
                b.host(toks[1], toks[2], number(toks[3], line, "vnf cost")?);
            }
            "vnfprice" => {
                arity(&toks, 4, line)?;
                b.price(toks[1], toks[2], number(toks[3], line, "vnf cost")?);
            }
            "link" => {
                arity(&toks, 5, line)?;
                b.link(toks[1], toks[2], toks[3], number(toks[4], line, "link capacity")?);
            }
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        }
    }
    Ok(b.build()?)
}

pub fn serialize_topology(g: &NfviGraph) -> String {
    let mut out = String::new();
    for n in g.nodes() {
        let _ = writeln!(out, "node {} {}", n.name, n.compute);
    }
    for f in g.vnf_names() {
        let _ = writeln!(out, "vnf {f}");
    }
    for (v, f, offer) in g.offers() {
        let kw = if offer.capable { "vnfcost" } else { "vnfprice" };
        let _ = writeln!(out, "{kw} {} {} {}", g.node(v).name, g.vnf_name(f), offer.cost);
    }
    for l in g.links() {
        let _ = writeln!(
            out,
            "link {} {} {} {}",
            l.name,
            g.node(l.from).name,
            g.node(l.to).name,
            l.capacity
        );
    }
    out
}

pub fn parse_demands(text: &str, g: &NfviGraph) -> Result<DemandStream, ParseError> {
    let mut demands = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some(&head) = toks.first() else { continue };
        if head != "demand" {
            return Err(syntax(line, format!("unknown directive {head:?}")));
        }
        arity(&toks, 6, line)?;
        let id: u64 = toks[1]
            .parse()
            .map_err(|_| syntax(line, format!("demand id {:?} is not an integer", toks[1])))?;
        let node = |name: &str| {
            g.node_by_name(name).ok_or_else(|| ModelError::InvalidDemand {
                id,
                reason: format!("unknown node {name:?}"),
            })
        };
        let source = node(toks[2])?;
        let destination = node(toks[3])?;
        let volume = number(toks[4], line, "volume")?;
        let chain = if toks[5] == "-" {
            Vec::new()
        } else {
            toks[5]
                .split(',')
                .map(|f| {
                    g.vnf_by_name(f).ok_or_else(|| ModelError::InvalidDemand {
                        id,
                        reason: format!("unknown vnf {f:?}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        demands.push(ServiceDemand {
            id,
            source,
            destination,
            volume,
            chain,
        });
    }
    Ok(DemandStream::new(demands, g)?)
}

pub fn serialize_demands(stream: &DemandStream, g: &NfviGraph) -> String {
    let mut out = String::new();
    for d in stream {
        let chain = if d.chain.is_empty() {
            "-".to_string()
        } else {
            d.chain
                .iter()
                .map(|&f| g.vnf_name(f))
                .collect::<Vec<_>>()
                .join(",")
        };
        let _ = writeln!(
            out,
            "demand {} {} {} {} {}",
            d.id,
            g.node(d.source).name,
            g.node(d.destination).name,
            d.volume,
            chain
        );
    }
    out
}
