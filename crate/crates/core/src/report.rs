//! Consistency tables: rendering (CSV, Markdown, JSON records), parsing, and
//! comparison against reference tables.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::AdjectiveType;
use crate::relations::{ConsistencyCell, GroupKey};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown table kind {0:?}")]
    UnknownKind(String),
    #[error("unknown format {0:?}")]
    UnknownFormat(String),
    #[error("bundle for {model:?} has no {kind} table")]
    MissingTable { model: String, kind: TableKind },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("parsing table: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    AnIntersectivity,
    AanIntersectivity,
    PairIntersectivity,
    NonSubsectivity,
}

impl TableKind {
    pub const ALL: [TableKind; 4] = [
        TableKind::AnIntersectivity,
        TableKind::AanIntersectivity,
        TableKind::PairIntersectivity,
        TableKind::NonSubsectivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableKind::AnIntersectivity => "an-intersectivity",
            TableKind::AanIntersectivity => "aan-intersectivity",
            TableKind::PairIntersectivity => "pair-intersectivity",
            TableKind::NonSubsectivity => "non-subsectivity",
        }
    }

    pub fn file_stem(self) -> String {
        self.name().replace('-', "_")
    }

    /// Decimal places for rates.
    pub fn precision(self) -> usize {
        match self {
            TableKind::AnIntersectivity => 3,
            _ => 4,
        }
    }

    pub fn is_pairwise(self) -> bool {
        matches!(
            self,
            TableKind::AanIntersectivity | TableKind::PairIntersectivity
        )
    }

    /// Column order. AAN columns vary the first adjective fastest; pair
    /// columns vary the second fastest.
    pub fn columns(self) -> Vec<GroupKey> {
        let types = AdjectiveType::ALL;
        match self {
            TableKind::AnIntersectivity | TableKind::NonSubsectivity => {
                types.iter().map(|&t| GroupKey::Type(t)).collect()
            }
            TableKind::AanIntersectivity => types
                .iter()
                .flat_map(|&second| {
                    types
                        .iter()
                        .map(move |&first| GroupKey::Pair(first, second))
                })
                .collect(),
            TableKind::PairIntersectivity => types
                .iter()
                .flat_map(|&first| {
                    types
                        .iter()
                        .map(move |&second| GroupKey::Pair(first, second))
                })
                .collect(),
        }
    }

    fn accepts(self, key: GroupKey) -> bool {
        match key {
            GroupKey::Type(_) => !self.is_pairwise(),
            GroupKey::Pair(..) => self.is_pairwise(),
            GroupKey::All => false,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableKind {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s || k.file_stem() == s)
            .ok_or_else(|| ReportError::UnknownKind(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
    Records,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
            Format::Records => "jsonl",
        }
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "records" | "jsonl" => Ok(Format::Records),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_digest: String,
    pub lexicon_hash: String,
    pub provider: String,
    pub seed: u64,
    pub max_adjectives: usize,
    pub relations: Vec<String>,
    pub phrase_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub cells: Vec<ConsistencyCell>,
    pub overall: ConsistencyCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub model_id: String,
    pub tables: BTreeMap<TableKind, TableResult>,
    pub metadata: RunMetadata,
}

impl ResultsBundle {
    pub fn table(&self, kind: TableKind) -> Result<&TableResult, ReportError> {
        self.tables
            .get(&kind)
            .ok_or_else(|| ReportError::MissingTable {
                model: self.model_id.clone(),
                kind,
            })
    }

    pub fn rate(&self, kind: TableKind, group: GroupKey) -> Option<f64> {
        self.tables
            .get(&kind)?
            .cells
            .iter()
            .find(|c| c.group == group && c.total > 0)
            .map(ConsistencyCell::rate)
    }
}

fn format_rate(rate: f64, precision: usize) -> String {
    format!("{rate:.precision$}")
}

/// Renders one row per bundle. Columns follow [`TableKind::columns`]; groups
/// a bundle lacks render as an empty field (CSV) or `-` (Markdown).
pub fn render_tables(
    bundles: &[&ResultsBundle],
    kind: TableKind,
    format: Format,
) -> Result<String, ReportError> {
    let columns = kind.columns();
    let precision = kind.precision();
    let mut rows = Vec::with_capacity(bundles.len());
    for b in bundles {
        let table = b.table(kind)?;
        let by_group: BTreeMap<GroupKey, &ConsistencyCell> = table
            .cells
            .iter()
            .filter(|c| c.total > 0)
            .map(|c| (c.group, c))
            .collect();
        rows.push((b, by_group));
    }

    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(&format!("# table: {kind}\n"));
            for b in bundles {
                out.push_str(&format!(
                    "# config_digest: {} ({})\n",
                    b.metadata.config_digest, b.model_id
                ));
            }
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(vec![]);
            let header: Vec<String> = std::iter::once("model".to_string())
                .chain(columns.iter().map(ToString::to_string))
                .collect();
            w.write_record(&header)
                .map_err(|e| ReportError::Parse(e.to_string()))?;
            for (b, cells) in &rows {
                let mut record = vec![b.model_id.clone()];
                record.extend(columns.iter().map(|g| {
                    cells
                        .get(g)
                        .map_or(String::new(), |c| format_rate(c.rate(), precision))
                }));
                w.write_record(&record)
                    .map_err(|e| ReportError::Parse(e.to_string()))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| ReportError::Parse(e.to_string()))?;
            out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
        }
        Format::Markdown => {
            out.push_str("| model |");
            for g in &columns {
                out.push_str(&format!(" {g} |"));
            }
            out.push_str("\n|---|");
            out.push_str(&"---:|".repeat(columns.len()));
            out.push('\n');
            for (b, cells) in &rows {
                out.push_str(&format!("| {} |", b.model_id));
                for g in &columns {
                    let v = cells
                        .get(g)
                        .map_or("-".to_string(), |c| format_rate(c.rate(), precision));
                    out.push_str(&format!(" {v} |"));
                }
                out.push('\n');
            }
            for b in bundles {
                out.push_str(&format!(
                    "\n<!-- {kind}; config_digest: {} -->\n",
                    b.metadata.config_digest
                ));
            }
        }
        Format::Records => {
            for (b, cells) in &rows {
                for g in &columns {
                    if let Some(c) = cells.get(g) {
                        let rec = serde_json::json!({
                            "config_digest": b.metadata.config_digest,
                            "model": b.model_id,
                            "table": kind.name(),
                            "group": g.to_string(),
                            "satisfied": c.satisfied,
                            "total": c.total,
                            "ties": c.ties,
                            "rate": c.rate(),
                        });
                        out.push_str(&rec.to_string());
                        out.push('\n');
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn render_table(
    bundle: &ResultsBundle,
    kind: TableKind,
    format: Format,
) -> Result<String, ReportError> {
    render_tables(&[bundle], kind, format)
}

/// A parsed CSV table: named rows of optional rates keyed by group.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub kind: TableKind,
    pub columns: Vec<GroupKey>,
    pub rows: Vec<(String, Vec<Option<f64>>)>,
}

impl ReferenceTable {
    pub fn row(&self, name: &str) -> Option<&[Option<f64>]> {
        self.rows
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_slice())
    }

    pub fn value(&self, row: &str, group: GroupKey) -> Option<f64> {
        let idx = self.columns.iter().position(|&g| g == group)?;
        self.row(row)?[idx]
    }
}

/// Parses a table CSV as written by [`render_table`] or shipped under
/// `data/reference/`. The kind comes from a `# table: <kind>` comment line,
/// or from `kind` when the file has none.
pub fn parse_table_csv(text: &str, kind: Option<TableKind>) -> Result<ReferenceTable, ReportError> {
    let declared = text
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix("table:").map(str::trim))
        .map(str::parse::<TableKind>)
        .transpose()?;
    let kind = match (declared, kind) {
        (Some(d), Some(k)) if d != k => {
            return Err(ReportError::ShapeMismatch(format!(
                "file declares {d}, expected {k}"
            )))
        }
        (Some(d), _) => d,
        (None, Some(k)) => k,
        (None, None) => return Err(ReportError::Parse("table kind not declared".into())),
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| ReportError::Parse(e.to_string()))?
        .clone();
    let columns = headers
        .iter()
        .skip(1)
        .map(|h| {
            let key = GroupKey::parse(h)
                .ok_or_else(|| ReportError::Parse(format!("bad column label {h:?}")))?;
            if kind.accepts(key) {
                Ok(key)
            } else {
                Err(ReportError::ShapeMismatch(format!(
                    "column {h:?} does not belong in a {kind} table"
                )))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| ReportError::Parse(e.to_string()))?;
        let name = record.get(0).unwrap_or_default().to_string();
        let values = record
            .iter()
            .skip(1)
            .map(|v| {
                if v.is_empty() || v == "-" {
                    Ok(None)
                } else {
                    v.parse::<f64>()
                        .map(Some)
                        .map_err(|_| ReportError::Parse(format!("row {name:?}: bad rate {v:?}")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != columns.len() {
            return Err(ReportError::Parse(format!(
                "row {name:?} has {} values for {} columns",
                values.len(),
                columns.len()
            )));
        }
        rows.push((name, values));
    }
    Ok(ReferenceTable {
        kind,
        columns,
        rows,
    })
}

/// Published reference tables bundled with the crate, one row per model.
pub fn bundled_reference(kind: TableKind) -> ReferenceTable {
    let text = match kind {
        TableKind::AnIntersectivity => include_str!("../data/reference/an_intersectivity.csv"),
        TableKind::AanIntersectivity => include_str!("../data/reference/aan_intersectivity.csv"),
        TableKind::PairIntersectivity => include_str!("../data/reference/pair_intersectivity.csv"),
        TableKind::NonSubsectivity => include_str!("../data/reference/non_subsectivity.csv"),
    };
    parse_table_csv(text, Some(kind)).expect("bundled reference tables parse")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub group: GroupKey,
    pub observed: Option<f64>,
    pub reference: f64,
    /// `|observed - reference|`, absent when the bundle lacks the cell.
    pub difference: Option<f64>,
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.observed, self.difference) {
            (Some(o), Some(d)) => write!(
                f,
                "{}: observed {o:.4}, reference {:.4}, off by {d:.4}",
                self.group, self.reference
            ),
            _ => write!(
                f,
                "{}: missing (reference {:.4})",
                self.group, self.reference
            ),
        }
    }
}

/// Cells of the reference row that the bundle misses or misses by more than
/// `tolerance`. The row is `row` if given, else the one named like the
/// bundle's model, else the only row.
pub fn compare_against_reference(
    bundle: &ResultsBundle,
    reference: &ReferenceTable,
    tolerance: f64,
    row: Option<&str>,
) -> Result<Vec<Deviation>, ReportError> {
    let kind = reference.kind;
    bundle.table(kind).map_err(|_| {
        ReportError::ShapeMismatch(format!(
            "bundle for {:?} has no {kind} table",
            bundle.model_id
        ))
    })?;
    let values = match row {
        Some(name) => reference.row(name),
        None => reference
            .row(&bundle.model_id)
            .or_else(|| (reference.rows.len() == 1).then(|| reference.rows[0].1.as_slice())),
    }
    .ok_or_else(|| {
        ReportError::ShapeMismatch(format!(
            "no reference row for {:?}",
            row.unwrap_or(&bundle.model_id)
        ))
    })?;

    let mut deviations = Vec::new();
    for (&group, &value) in reference.columns.iter().zip(values) {
        let Some(reference) = value else { continue };
        let observed = bundle.rate(kind, group);
        let difference = observed.map(|o| (o - reference).abs());
        if difference.is_none_or(|d| d > tolerance) {
            deviations.push(Deviation {
                group,
                observed,
                reference,
                difference,
            });
        }
    }
    Ok(deviations)
}
