//! Edge-list and attribute-table files. Edges are tab-separated label
//! pairs; attributes are CSV with a header whose first column is the vertex
//! label. Attribute columns where every value parses as a number become
//! numeric; anything else becomes categorical with levels in first-seen
//! order.

use std::path::Path;

use crate::attrs::{intern_levels, AttrColumn, Attributes};
use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph};

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Reads a tab-separated edge list of `tail\thead` label pairs.
pub fn read_edges(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::Parse {
                file: path_str(path),
                line,
                msg: format!("expected 2 tab-separated fields, found {}", record.len()),
            });
        }
        if record[0].is_empty() || record[1].is_empty() {
            return Err(Error::Parse {
                file: path_str(path),
                line,
                msg: "empty vertex label".into(),
            });
        }
        out.push((record[0].to_string(), record[1].to_string()));
    }
    Ok(out)
}

/// Writes the graph's edges as a tab-separated label-pair list.
pub fn write_edges(path: impl AsRef<Path>, graph: &Graph, labels: &[String]) -> Result<()> {
    if labels.len() != graph.n() as usize {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} vertices",
            labels.len(),
            graph.n()
        )));
    }
    let mut writer = csv::WriterBuilder::new().delimiter(b'\t').from_path(path)?;
    for d in graph.edges() {
        writer.write_record([&labels[d.tail as usize], &labels[d.head as usize]])?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a CSV attribute table: header row, first column the vertex label.
pub fn read_attributes(path: impl AsRef<Path>) -> Result<Attributes> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header = reader.headers()?.clone();
    if header.is_empty() {
        return Err(Error::Parse {
            file: path_str(path),
            line: 1,
            msg: "attribute table has no columns".into(),
        });
    }
    let n_cols = header.len();
    let mut labels = Vec::new();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); n_cols - 1];
    for record in reader.records() {
        let record = record?;
        if record.len() != n_cols {
            return Err(Error::Parse {
                file: path_str(path),
                line: record.position().map(|p| p.line()).unwrap_or(0),
                msg: format!("expected {n_cols} fields, found {}", record.len()),
            });
        }
        labels.push(record[0].to_string());
        for (c, cell) in record.iter().skip(1).enumerate() {
            raw[c].push(cell.to_string());
        }
    }
    let mut attrs = Attributes::from_labels(labels)?;
    for (c, values) in raw.into_iter().enumerate() {
        let name = header[c + 1].to_string();
        let numeric: Option<Vec<f64>> =
            values.iter().map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite())).collect();
        let column = match numeric {
            Some(xs) => AttrColumn::Numeric(xs),
            None => intern_levels(&values),
        };
        attrs.add_column(&name, column)?;
    }
    Ok(attrs)
}

/// Builds a graph from labeled edge pairs. With an attribute table the
/// vertex set and ids come from it (every endpoint must appear there);
/// otherwise vertices are assigned ids in first-appearance order.
pub fn assemble_graph(
    pairs: &[(String, String)],
    directed: bool,
    attrs: Option<Attributes>,
) -> Result<(Graph, Attributes)> {
    let attrs = match attrs {
        Some(a) => a,
        None => {
            let mut labels = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for (t, h) in pairs {
                for l in [t, h] {
                    if seen.insert(l.clone()) {
                        labels.push(l.clone());
                    }
                }
            }
            Attributes::from_labels(labels)?
        }
    };
    let mut graph = Graph::new(attrs.n(), directed)?;
    for (t, h) in pairs {
        let ti = attrs
            .label_id(t)
            .ok_or_else(|| Error::InvalidArgument(format!("edge endpoint '{t}' is not a known vertex")))?;
        let hi = attrs
            .label_id(h)
            .ok_or_else(|| Error::InvalidArgument(format!("edge endpoint '{h}' is not a known vertex")))?;
        if ti == hi {
            return Err(Error::SelfLoop(ti));
        }
        graph.set_edge(Dyad::new(ti, hi), true)?;
    }
    Ok((graph, attrs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn edges_round_trip() {
        let f = write_temp("a\tb\nb\tc\n", ".tsv");
        let pairs = read_edges(f.path()).unwrap();
        assert_eq!(pairs, vec![("a".into(), "b".into()), ("b".into(), "c".into())]);
        let (graph, attrs) = assemble_graph(&pairs, false, None).unwrap();
        assert_eq!(graph.n(), 3);
        assert_eq!(graph.edge_count(), 2);
        assert_eq!(attrs.labels(), ["a", "b", "c"]);

        let out = tempfile::Builder::new().suffix(".tsv").tempfile().unwrap();
        write_edges(out.path(), &graph, attrs.labels()).unwrap();
        let back = read_edges(out.path()).unwrap();
        let (graph2, _) = assemble_graph(&back, false, Some(attrs)).unwrap();
        assert_eq!(graph2.edge_count(), 2);
        assert!(graph2.has_edge(Dyad::new(0, 1)));
        assert!(graph2.has_edge(Dyad::new(1, 2)));
    }

    #[test]
    fn malformed_edges() {
        let f = write_temp("a\tb\tc\n", ".tsv");
        assert!(matches!(read_edges(f.path()), Err(Error::Parse { line: 1, .. })));
        let g = write_temp("a\n", ".tsv");
        assert!(read_edges(g.path()).is_err());
    }

    #[test]
    fn attribute_inference() {
        let f = write_temp(
            "name,seniority,office\nalice,1.5,boston\nbob,2,hartford\ncarol,3,boston\n",
            ".csv",
        );
        let attrs = read_attributes(f.path()).unwrap();
        assert_eq!(attrs.n(), 3);
        assert_eq!(attrs.numeric("seniority").unwrap(), &[1.5, 2.0, 3.0]);
        let (levels, codes) = attrs.categorical("office").unwrap();
        assert_eq!(levels, ["boston", "hartford"]);
        assert_eq!(codes, &[0, 1, 0]);
        // A single non-numeric cell makes the whole column categorical.
        let g = write_temp("name,x\na,1\nb,n/a\n", ".csv");
        let attrs2 = read_attributes(g.path()).unwrap();
        assert!(attrs2.numeric("x").is_err());
        assert!(attrs2.categorical("x").is_ok());
    }

    #[test]
    fn assemble_with_attribute_table() {
        let f = write_temp("name,grp\nx,a\ny,a\nz,b\n", ".csv");
        let attrs = read_attributes(f.path()).unwrap();
        let pairs = vec![("z".to_string(), "x".to_string())];
        let (graph, attrs) = assemble_graph(&pairs, false, Some(attrs)).unwrap();
        assert_eq!(graph.n(), 3);
        assert!(graph.has_edge(Dyad::new(2, 0)));
        assert_eq!(attrs.labels(), ["x", "y", "z"]);

        let missing = vec![("x".to_string(), "w".to_string())];
        let f2 = write_temp("name,grp\nx,a\ny,a\nz,b\n", ".csv");
        let attrs2 = read_attributes(f2.path()).unwrap();
        assert!(assemble_graph(&missing, false, Some(attrs2)).is_err());
    }

    #[test]
    fn self_loops_rejected() {
        let pairs = vec![("a".to_string(), "a".to_string())];
        assert!(matches!(assemble_graph(&pairs, false, None), Err(Error::SelfLoop(0))));
    }
}
