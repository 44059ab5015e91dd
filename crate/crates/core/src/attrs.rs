//! Vertex attribute table: string labels plus numeric or categorical columns.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// One attribute column. Categorical levels are interned; `codes[v]` indexes
/// into `levels`.
#[derive(Debug, Clone)]
pub enum AttrColumn {
    Numeric(Vec<f64>),
    Categorical { levels: Vec<String>, codes: Vec<u32> },
}

impl AttrColumn {
    pub fn len(&self) -> usize {
        match self {
            AttrColumn::Numeric(v) => v.len(),
            AttrColumn::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Vertex labels and attribute columns, row-aligned with vertex ids `0..n`.
#[derive(Debug, Clone, Default)]
pub struct Attributes {
    labels: Vec<String>,
    label_index: HashMap<String, u32>,
    columns: Vec<(String, AttrColumn)>,
}

impl Attributes {
    /// Builds a table from labels alone (no columns).
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let mut label_index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if label_index.insert(l.clone(), i as u32).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate vertex label `{l}`")));
            }
        }
        Ok(Attributes { labels, label_index, columns: Vec::new() })
    }

    pub fn add_column(&mut self, name: &str, column: AttrColumn) -> Result<()> {
        if column.len() != self.labels.len() {
            return Err(Error::InvalidArgument(format!(
                "column `{name}` has {} rows, expected {}",
                column.len(),
                self.labels.len()
            )));
        }
        if self.columns.iter().any(|(existing, _)| existing == name) {
            return Err(Error::InvalidArgument(format!("duplicate column `{name}`")));
        }
        self.columns.push((name.to_string(), column));
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.labels.len() as u32
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_id(&self, label: &str) -> Option<u32> {
        self.label_index.get(label).copied()
    }

    pub fn column(&self, name: &str) -> Option<&AttrColumn> {
        self.columns.iter().find(|(c, _)| c == name).map(|(_, col)| col)
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(c, _)| c.as_str())
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64]> {
        match self.column(name) {
            Some(AttrColumn::Numeric(v)) => Ok(v),
            Some(_) => Err(Error::AttributeType { name: name.into(), expected: "numeric" }),
            None => Err(Error::MissingAttribute(name.into())),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<(&[String], &[u32])> {
        match self.column(name) {
            Some(AttrColumn::Categorical { levels, codes }) => Ok((levels, codes)),
            Some(_) => Err(Error::AttributeType { name: name.into(), expected: "categorical" }),
            None => Err(Error::MissingAttribute(name.into())),
        }
    }

    /// Categorical view of a column: numeric columns are coerced by formatting
    /// each distinct value as a level (useful for grouping by a numeric code).
    pub fn as_categorical(&self, name: &str) -> Result<(Vec<String>, Vec<u32>)> {
        match self.column(name) {
            Some(AttrColumn::Categorical { levels, codes }) => Ok((levels.clone(), codes.clone())),
            Some(AttrColumn::Numeric(values)) => {
                let mut levels: Vec<String> = Vec::new();
                let mut codes = Vec::with_capacity(values.len());
                for v in values {
                    let s = format_numeric(*v);
                    let code = match levels.iter().position(|l| *l == s) {
                        Some(i) => i as u32,
                        None => {
                            levels.push(s);
                            levels.len() as u32 - 1
                        }
                    };
                    codes.push(code);
                }
                Ok((levels, codes))
            }
            None => Err(Error::MissingAttribute(name.into())),
        }
    }
}

fn format_numeric(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Interns raw string values into a categorical column, levels in first-seen
/// order.
pub fn intern_levels(values: &[String]) -> AttrColumn {
    let mut levels: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut codes = Vec::with_capacity(values.len());
    for v in values {
        let code = match index.get(v) {
            Some(&c) => c,
            None => {
                let c = levels.len() as u32;
                levels.push(v.clone());
                index.insert(v.clone(), c);
                c
            }
        };
        codes.push(code);
    }
    AttrColumn::Categorical { levels, codes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_and_columns() {
        let mut a = Attributes::from_labels(vec!["x".into(), "y".into(), "z".into()]).unwrap();
        a.add_column("sen", AttrColumn::Numeric(vec![1.0, 2.0, 3.0])).unwrap();
        a.add_column("office", intern_levels(&["b".into(), "b".into(), "p".into()])).unwrap();
        assert_eq!(a.n(), 3);
        assert_eq!(a.label_id("y"), Some(1));
        assert_eq!(a.numeric("sen").unwrap(), &[1.0, 2.0, 3.0]);
        let (levels, codes) = a.categorical("office").unwrap();
        assert_eq!(levels, &["b".to_string(), "p".to_string()]);
        assert_eq!(codes, &[0, 0, 1]);
        assert!(a.numeric("office").is_err());
        assert!(a.numeric("missing").is_err());
    }

    #[test]
    fn duplicate_label_rejected() {
        assert!(Attributes::from_labels(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn numeric_as_categorical() {
        let mut a = Attributes::from_labels(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        a.add_column("grade", AttrColumn::Numeric(vec![7.0, 8.0, 7.0])).unwrap();
        let (levels, codes) = a.as_categorical("grade").unwrap();
        assert_eq!(levels, vec!["7".to_string(), "8".to_string()]);
        assert_eq!(codes, vec![0, 1, 0]);
    }
}
