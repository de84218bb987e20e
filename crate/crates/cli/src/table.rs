use std::path::Path;

use anyhow::{anyhow, Context};

/// CSV with a header row; cells are kept as text so unknown columns pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        let header = r.headers()?.iter().map(str::to_owned).collect::<Vec<_>>();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .with_context(|| format!("reading {}", path.display()))?;
        Ok(Self { header, rows })
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn has(&self, name: &str) -> bool {
        self.index(name).is_some()
    }

    pub fn column(&self, name: &str) -> anyhow::Result<Vec<f64>> {
        let k = self.index(name).ok_or_else(|| anyhow!("missing column {name:?}"))?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r.get(k)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| anyhow!("row {i}: column {name:?} is not a number"))
            })
            .collect()
    }

    pub fn push_column(&mut self, name: &str, values: &[f64]) {
        self.header.push(name.to_owned());
        for (row, v) in self.rows.iter_mut().zip(values) {
            row.push(fmt(*v));
        }
    }

    pub fn push_row(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| fmt(*v)).collect());
    }
}

pub fn fmt(v: f64) -> String {
    discordlab::dataset::format_float(v)
}
