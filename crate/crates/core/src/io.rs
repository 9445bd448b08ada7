//! Edge-list and community file parsing, dataset preprocessing, and the text
//! formats written by the pipeline.

use std::collections::HashMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{split_into_components, AffiliationNetwork, Graph, NodeId};
use crate::metrics::Curve;

pub type Label = i64;

pub const EDGES_FILE: &str = "edges.txt";
pub const COMMUNITIES_FILE: &str = "communities.txt";
pub const ID_MAP_FILE: &str = "id_map.tsv";

/// Dense id to original label table. Labels are stored in ascending order so
/// the dense id of a label is its rank.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    labels: Vec<Label>,
}

impl IdMap {
    pub fn from_sorted(labels: Vec<Label>) -> Result<Self> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("id map labels must be strictly increasing"));
        }
        Ok(Self { labels })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            labels: (0..n as Label).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: NodeId) -> Label {
        self.labels[id]
    }

    pub fn id(&self, label: Label) -> Option<NodeId> {
        self.labels.binary_search(&label).ok()
    }
}

/// A graph, its ground-truth affiliation network, and the label table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub affiliations: AffiliationNetwork,
    pub id_map: IdMap,
}

impl Dataset {
    pub fn new(graph: Graph, affiliations: AffiliationNetwork) -> Result<Self> {
        if graph.node_count() != affiliations.node_count() {
            return Err(Error::invalid(format!(
                "graph has {} nodes but affiliation network has {}",
                graph.node_count(),
                affiliations.node_count()
            )));
        }
        let id_map = IdMap::identity(graph.node_count());
        Ok(Self {
            graph,
            affiliations,
            id_map,
        })
    }

    /// Edges and communities in original labels, suitable for re-ingestion.
    pub fn to_labeled(&self) -> (Vec<(Label, Label)>, Vec<Vec<Label>>) {
        let edges = self
            .graph
            .edges()
            .map(|(u, v)| (self.id_map.label(u), self.id_map.label(v)))
            .collect();
        let comms = self
            .affiliations
            .communities()
            .iter()
            .map(|m| m.iter().map(|&u| self.id_map.label(u)).collect())
            .collect();
        (edges, comms)
    }

    /// Write `edges.txt`, `communities.txt` and `id_map.tsv` (dense ids) into `dir`.
    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join(EDGES_FILE))?);
        write_edge_list(&self.graph, &mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join(COMMUNITIES_FILE))?);
        write_communities(&self.affiliations, &mut w)?;
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join(ID_MAP_FILE))?);
        write_id_map(&self.id_map, &mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Load a canonical dataset directory written by [`Dataset::save_dir`].
    ///
    /// Ids are taken as already dense; no preprocessing is applied, so
    /// generated graphs keep their affiliation network as written.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let edge_path = dir.join(EDGES_FILE);
        let comm_path = dir.join(COMMUNITIES_FILE);
        let edges = parse_edge_list(BufReader::new(File::open(&edge_path)?))
            .map_err(|e| e.with_path(&edge_path))?;
        let comms = parse_community_file(BufReader::new(File::open(&comm_path)?))
            .map_err(|e| e.with_path(&comm_path))?;

        let map_path = dir.join(ID_MAP_FILE);
        let id_map = if map_path.exists() {
            read_id_map(BufReader::new(File::open(&map_path)?))
                .map_err(|e| e.with_path(&map_path))?
        } else {
            let max = edges
                .iter()
                .flat_map(|&(u, v)| [u, v])
                .chain(comms.iter().flatten().copied())
                .max();
            IdMap::identity(max.map_or(0, |m| m as usize + 1))
        };
        let n = id_map.len();
        let to_id = |x: Label| -> Result<NodeId> {
            if x < 0 || x as usize >= n {
                Err(Error::invalid(format!("dense id {x} out of range for {n} nodes")))
            } else {
                Ok(x as NodeId)
            }
        };
        let edges = edges
            .into_iter()
            .map(|(u, v)| Ok((to_id(u)?, to_id(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let comms = comms
            .into_iter()
            .map(|c| c.into_iter().map(to_id).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            graph: Graph::from_edges(n, edges)?,
            affiliations: AffiliationNetwork::new(n, comms)?,
            id_map,
        })
    }
}

/// Table-1 style dataset statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSummary {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
    /// Mean community size.
    pub mean_size: f64,
    /// Mean community memberships per node.
    pub mean_memberships: f64,
}

impl fmt::Display for DatasetSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N\t{}", self.nodes)?;
        writeln!(f, "E\t{}", self.edges)?;
        writeln!(f, "C\t{}", self.communities)?;
        writeln!(f, "S\t{}", self.mean_size)?;
        writeln!(f, "A\t{}", self.mean_memberships)
    }
}

pub fn summarize(ds: &Dataset) -> DatasetSummary {
    let nodes = ds.graph.node_count();
    let communities = ds.affiliations.community_count();
    let total = ds.affiliations.membership_count() as f64;
    DatasetSummary {
        nodes,
        edges: ds.graph.edge_count(),
        communities,
        mean_size: if communities == 0 { 0.0 } else { total / communities as f64 },
        mean_memberships: if nodes == 0 { 0.0 } else { total / nodes as f64 },
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

fn parse_label(tok: &str, line: usize) -> Result<Label> {
    tok.parse::<Label>().map_err(|_| Error::Parse {
        path: None,
        line,
        message: format!("expected an integer label, found {tok:?}"),
    })
}

/// Parse `src dst` lines. Self-loops and duplicates are kept.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<Vec<(Label, Label)>> {
    let mut edges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: None,
                line: lineno,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        edges.push((parse_label(fields[0], lineno)?, parse_label(fields[1], lineno)?));
    }
    Ok(edges)
}

/// Layout of a community file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommunityFormat {
    /// Decide from the content, see [`parse_community_file_as`].
    #[default]
    Auto,
    /// One community per line, whitespace-separated member labels.
    PerLine,
    /// `node community_id` pairs, one membership per line.
    NodePairs,
}

/// Parse a community file with format auto-detection.
pub fn parse_community_file<R: BufRead>(reader: R) -> Result<Vec<Vec<Label>>> {
    parse_community_file_as(reader, CommunityFormat::Auto)
}

/// Parse a community file.
///
/// In `Auto` mode the node-pair layout is chosen when every data line has
/// exactly two columns and some community id in the second column repeats;
/// otherwise lines are read as one community each. Duplicate labels within a
/// community are collapsed while the first-seen order is kept.
pub fn parse_community_file_as<R: BufRead>(
    reader: R,
    format: CommunityFormat,
) -> Result<Vec<Vec<Label>>> {
    let mut rows: Vec<(usize, Vec<Label>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if is_skippable(&line) {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| parse_label(t, i + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push((i + 1, row));
    }

    let pairs = match format {
        CommunityFormat::PerLine => false,
        CommunityFormat::NodePairs => true,
        CommunityFormat::Auto => {
            let all_two = !rows.is_empty() && rows.iter().all(|(_, r)| r.len() == 2);
            let mut seconds: Vec<Label> = rows.iter().filter_map(|(_, r)| r.get(1).copied()).collect();
            seconds.sort_unstable();
            seconds.dedup();
            all_two && seconds.len() < rows.len()
        }
    };

    if pairs {
        let mut index: HashMap<Label, usize> = HashMap::new();
        let mut comms: Vec<Vec<Label>> = Vec::new();
        for (lineno, row) in rows {
            if row.len() != 2 {
                return Err(Error::Parse {
                    path: None,
                    line: lineno,
                    message: format!("expected `node community` pair, found {} fields", row.len()),
                });
            }
            let slot = *index.entry(row[1]).or_insert_with(|| {
                comms.push(Vec::new());
                comms.len() - 1
            });
            if !comms[slot].contains(&row[0]) {
                comms[slot].push(row[0]);
            }
        }
        Ok(comms)
    } else {
        Ok(rows
            .into_iter()
            .map(|(_, row)| {
                let mut seen = Vec::with_capacity(row.len());
                for x in row {
                    if !seen.contains(&x) {
                        seen.push(x);
                    }
                }
                seen
            })
            .collect())
    }
}

/// Build a clean dataset from raw labeled input.
///
/// Self-loops and duplicate edges are removed, labels that occur in at least
/// one non-loop edge become nodes (dense ids in ascending label order),
/// community members absent from the graph are dropped, every community is
/// split into the connected components of its induced subgraph, and
/// components of size one are discarded. Identical member sets are retained
/// as distinct communities.
pub fn preprocess(edges: &[(Label, Label)], communities: &[Vec<Label>]) -> Dataset {
    let mut labels: Vec<Label> = edges
        .iter()
        .filter(|(u, v)| u != v)
        .flat_map(|&(u, v)| [u, v])
        .collect();
    labels.sort_unstable();
    labels.dedup();
    let id_map = IdMap { labels };

    let dense = edges
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| (id_map.id(u).unwrap(), id_map.id(v).unwrap()));
    let graph = Graph::from_edges(id_map.len(), dense).expect("ids are in range by construction");

    let mut comms = Vec::new();
    for community in communities {
        let members: Vec<NodeId> = community.iter().filter_map(|&l| id_map.id(l)).collect();
        for comp in split_into_components(&graph, &members) {
            if comp.len() >= 2 {
                comms.push(comp);
            }
        }
    }
    let affiliations =
        AffiliationNetwork::new(id_map.len(), comms).expect("members are in range by construction");
    Dataset {
        graph,
        affiliations,
        id_map,
    }
}

pub fn write_edge_list<W: Write>(g: &Graph, w: &mut W) -> Result<()> {
    for (u, v) in g.edges() {
        writeln!(w, "{u}\t{v}")?;
    }
    Ok(())
}

pub fn write_communities<W: Write>(net: &AffiliationNetwork, w: &mut W) -> Result<()> {
    for members in net.communities() {
        let line: Vec<String> = members.iter().map(|u| u.to_string()).collect();
        writeln!(w, "{}", line.join("\t"))?;
    }
    Ok(())
}

pub fn write_id_map<W: Write>(map: &IdMap, w: &mut W) -> Result<()> {
    writeln!(w, "# id\tlabel")?;
    for (id, label) in map.labels.iter().enumerate() {
        writeln!(w, "{id}\t{label}")?;
    }
    Ok(())
}

pub fn read_id_map<R: BufRead>(reader: R) -> Result<IdMap> {
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if is_skippable(&line) {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_err = |message: String| Error::Parse {
            path: None,
            line: i + 1,
            message,
        };
        if fields.len() != 2 {
            return Err(parse_err(format!("expected `id label`, found {} fields", fields.len())));
        }
        let id = parse_label(fields[0], i + 1)?;
        if id != labels.len() as Label {
            return Err(parse_err(format!("expected id {}, found {id}", labels.len())));
        }
        labels.push(parse_label(fields[1], i + 1)?);
    }
    IdMap::from_sorted(labels)
}

/// Two-column TSV with a `#` header line describing the curve.
pub fn write_curve<W: Write>(curve: &Curve, w: &mut W) -> Result<()> {
    writeln!(
        w,
        "# {}\t{}\tkind={}",
        curve.x_label,
        curve.y_label,
        curve.kind.as_str()
    )?;
    for &(x, y) in &curve.points {
        writeln!(w, "{x}\t{y}")?;
    }
    Ok(())
}

pub fn write_curve_file(curve: &Curve, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_curve(curve, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Read a curve TSV; the header line, when present, restores the labels.
pub fn read_curve<R: BufRead>(reader: R) -> Result<Curve> {
    use crate::metrics::CurveKind;
    let mut x_label = "x".to_string();
    let mut y_label = "y".to_string();
    let mut kind = CurveKind::Raw;
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if let Some(header) = t.strip_prefix('#') {
            let parts: Vec<&str> = header.trim().split('\t').collect();
            if parts.len() == 3 {
                x_label = parts[0].to_string();
                y_label = parts[1].to_string();
                if let Some(k) = parts[2].strip_prefix("kind=").and_then(CurveKind::parse) {
                    kind = k;
                }
            }
            continue;
        }
        if t.is_empty() {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                path: None,
                line: i + 1,
                message: format!("expected a number, found {s:?}"),
            })
        };
        if fields.len() != 2 {
            return Err(Error::Parse {
                path: None,
                line: i + 1,
                message: format!("expected 2 fields, found {}", fields.len()),
            });
        }
        points.push((num(fields[0])?, num(fields[1])?));
    }
    Ok(Curve {
        points,
        x_label,
        y_label,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::CurveKind;
    use std::io::Cursor;

    fn edges(s: &str) -> Result<Vec<(Label, Label)>> {
        parse_edge_list(Cursor::new(s))
    }

    fn comms(s: &str) -> Result<Vec<Vec<Label>>> {
        parse_community_file(Cursor::new(s))
    }

    #[test]
    fn edge_list_examples() {
        assert_eq!(edges("# c\n1\t2\n2\t1\n").unwrap(), vec![(1, 2), (2, 1)]);
        assert_eq!(edges("").unwrap(), vec![]);
        assert_eq!(edges("1 2\n1 1\n").unwrap(), vec![(1, 2), (1, 1)]);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        match edges("1 2\n# x\n3 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        match edges("1 2 3\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn community_file_examples() {
        assert_eq!(comms("1 2 3\n2 3 4\n").unwrap(), vec![vec![1, 2, 3], vec![2, 3, 4]]);
        assert_eq!(comms("7\n").unwrap(), vec![vec![7]]);
        assert_eq!(comms("1 1 2\n").unwrap(), vec![vec![1, 2]]);
        assert!(matches!(comms("1 a\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn community_node_pair_format_detected() {
        let parsed = comms("1\t10\n2\t10\n3\t20\n2\t20\n").unwrap();
        assert_eq!(parsed, vec![vec![1, 2], vec![3, 2]]);
        // Two-column lines without repeated community ids stay per-line.
        assert_eq!(comms("1 2\n3 4\n").unwrap(), vec![vec![1, 2], vec![3, 4]]);
        let forced =
            parse_community_file_as(Cursor::new("1 2\n3 4\n"), CommunityFormat::NodePairs).unwrap();
        assert_eq!(forced, vec![vec![1], vec![3]]);
    }

    #[test]
    fn preprocess_examples() {
        let ds = preprocess(&[(1, 2)], &[vec![1, 2, 3]]);
        assert_eq!(ds.affiliations.communities(), &[vec![0, 1]]);

        let ds = preprocess(&[(1, 2), (2, 1), (1, 1)], &[]);
        assert_eq!(ds.graph.edge_count(), 1);
        assert_eq!(ds.graph.node_count(), 2);

        let ds = preprocess(&[(1, 2)], &[vec![5, 6]]);
        assert_eq!(ds.affiliations.community_count(), 0);
    }

    #[test]
    fn preprocess_splits_and_keeps_duplicates() {
        // Path 1-2, 3-4 with one community spanning both pieces, twice.
        let ds = preprocess(&[(1, 2), (3, 4)], &[vec![4, 3, 2, 1], vec![1, 2, 3, 4]]);
        assert_eq!(
            ds.affiliations.communities(),
            &[vec![0, 1], vec![2, 3], vec![0, 1], vec![2, 3]]
        );
    }

    #[test]
    fn summary_examples() {
        let ds = preprocess(&[(1, 2), (2, 3), (1, 3)], &[vec![1, 2, 3]]);
        let s = summarize(&ds);
        assert_eq!((s.nodes, s.edges, s.communities), (3, 3, 1));
        assert_eq!((s.mean_size, s.mean_memberships), (3.0, 1.0));

        let ds = preprocess(&[(1, 2), (2, 3)], &[vec![1, 2], vec![2, 3]]);
        let s = summarize(&ds);
        assert_eq!(s.communities, 2);
        assert_eq!(s.mean_size, 2.0);
        assert!((s.mean_memberships - 4.0 / 3.0).abs() < 1e-15);

        let ds = preprocess(&[(1, 2)], &[]);
        assert_eq!(summarize(&ds).mean_size, 0.0);
    }

    #[test]
    fn preprocess_is_idempotent_and_round_trips() {
        let raw_edges = [(10, 20), (20, 10), (20, 30), (30, 30), (40, 50), (7, 7)];
        let raw_comms = [vec![10, 20, 30, 40, 50, 99], vec![50, 40], vec![7]];
        let once = preprocess(&raw_edges, &raw_comms);
        let (e, c) = once.to_labeled();
        let twice = preprocess(&e, &c);
        assert_eq!(once, twice);

        let dir = std::env::temp_dir().join(format!("agm-io-test-{}", std::process::id()));
        once.save_dir(&dir).unwrap();
        let loaded = Dataset::load_dir(&dir).unwrap();
        assert_eq!(loaded, once);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn curve_tsv_round_trip() {
        let curve = Curve::new(vec![(1.0, 0.5), (2.5, 1e-3)], "size", "edges", CurveKind::Raw);
        let mut buf = Vec::new();
        write_curve(&curve, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# size\tedges\tkind=raw\n1\t0.5\n"));
        assert_eq!(read_curve(Cursor::new(buf)).unwrap(), curve);
    }
}
