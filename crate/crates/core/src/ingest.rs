//! Pulls pipe-markdown tables out of pasted chat responses and turns them
//! into dimensions, columns and definitions.
//!
//! Extraction never fails. Malformed input degrades to fewer tables or to
//! warnings that the user resolves while post-editing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::comparison::{dimension_key, Dimension, Origin};

/// Outcome of the dimension-name rule: 1 to 3 whitespace-delimited tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NameCheck {
    Valid { tokens: usize },
    Violation { tokens: usize, reason: String },
}

impl NameCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, NameCheck::Valid { .. })
    }

    pub fn tokens(&self) -> usize {
        match self {
            NameCheck::Valid { tokens } | NameCheck::Violation { tokens, .. } => *tokens,
        }
    }
}

/// Number of maximal non-whitespace runs in `name`.
pub fn count_tokens(name: &str) -> usize {
    name.split_whitespace().count()
}

pub fn validate_dimension_name(name: &str) -> NameCheck {
    let tokens = count_tokens(name);
    match tokens {
        1..=3 => NameCheck::Valid { tokens },
        0 => NameCheck::Violation {
            tokens,
            reason: "name is empty".into(),
        },
        _ => NameCheck::Violation {
            tokens,
            reason: format!("name has {tokens} tokens; at most 3 are allowed"),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// First and last source line of the table, 1-based and inclusive.
    pub line_span: (usize, usize),
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestColumn {
    pub label: String,
    /// One value per entry of [`ParsedIngest::dimensions`].
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedIngest {
    pub comparison_table: Option<RawTable>,
    pub definitions_table: Option<RawTable>,
    pub dimensions: Vec<Dimension>,
    pub columns: Vec<IngestColumn>,
    pub warnings: Vec<String>,
}

impl ParsedIngest {
    /// An ingest result without source tables, for callers that build one by hand.
    pub fn from_parts(dimensions: Vec<Dimension>, columns: Vec<IngestColumn>) -> Self {
        ParsedIngest {
            dimensions,
            columns,
            ..Default::default()
        }
    }

    /// Equality ignoring where in the source text the tables sat.
    pub fn same_content(&self, other: &ParsedIngest) -> bool {
        type Content<'a> = (&'a [String], &'a [Vec<String>], &'a [String]);
        fn strip(t: &Option<RawTable>) -> Option<Content<'_>> {
            t.as_ref().map(|t| (&t.header[..], &t.rows[..], &t.warnings[..]))
        }
        self.dimensions == other.dimensions
            && self.columns == other.columns
            && self.warnings == other.warnings
            && strip(&self.comparison_table) == strip(&other.comparison_table)
            && strip(&self.definitions_table) == strip(&other.definitions_table)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("no table in the response qualifies as a comparison or definitions table")]
    NoUsableTable,
}

fn is_fence(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with("```") || t.starts_with("~~~")
}

fn is_candidate(line: &str) -> bool {
    !is_fence(line) && line.contains('|')
}

/// Splits one table line into trimmed cells. `\|` is a literal pipe.
fn split_cells(line: &str) -> Vec<String> {
    let mut t = line.trim();
    t = t.strip_prefix('|').unwrap_or(t);
    if t.ends_with('|') && !t.ends_with("\\|") {
        t = &t[..t.len() - 1];
    }
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut chars = t.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if chars.peek() == Some(&'|') => {
                cur.push('|');
                chars.next();
            }
            '|' => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    cells.push(cur);
    cells.into_iter().map(|c| c.trim().to_string()).collect()
}

fn is_separator_cell(cell: &str) -> bool {
    let c = cell.strip_prefix(':').unwrap_or(cell);
    let c = c.strip_suffix(':').unwrap_or(c);
    !c.is_empty() && c.chars().all(|ch| ch == '-')
}

fn is_separator(line: &str) -> bool {
    let cells = split_cells(line);
    cells.iter().all(|c| is_separator_cell(c))
}

/// Removes wrapping `**`, `*` and backtick markers.
pub fn strip_emphasis(cell: &str) -> String {
    let mut s = cell.trim();
    loop {
        let before = s;
        for marker in ["**", "*", "`"] {
            if s.len() > 2 * marker.len() && s.starts_with(marker) && s.ends_with(marker) {
                s = s[marker.len()..s.len() - marker.len()].trim();
                break;
            }
        }
        if s == before {
            return s.to_string();
        }
    }
}

fn build_table(lines: &[(usize, &str)], ordinal: usize) -> Option<RawTable> {
    let (first, header_line) = *lines.first()?;
    let header: Vec<String> = split_cells(header_line)
        .iter()
        .map(|c| strip_emphasis(c))
        .collect();
    let width = header.len();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut last = first;
    for &(n, line) in &lines[1..] {
        if is_separator(line) {
            continue;
        }
        let mut cells = split_cells(line);
        if cells.len() > width {
            warnings.push(format!(
                "table {ordinal}: row {} has {} cells, expected {width}; extra cells dropped",
                rows.len() + 1,
                cells.len()
            ));
            cells.truncate(width);
        } else if cells.len() < width {
            warnings.push(format!(
                "table {ordinal}: row {} has {} cells, expected {width}; padded with empty cells",
                rows.len() + 1,
                cells.len()
            ));
            cells.resize(width, String::new());
        }
        rows.push(cells);
        last = n;
    }
    Some(RawTable {
        header,
        rows,
        line_span: (first, last),
        warnings,
    })
}

/// Finds every pipe table in `block`, a run of consecutive pipe-bearing lines.
fn tables_in_block<'a>(block: &[(usize, &'a str)], out: &mut Vec<Vec<(usize, &'a str)>>) {
    let mut seps: Vec<usize> = Vec::new();
    for (i, &(_, line)) in block.iter().enumerate().skip(1) {
        if is_separator(line) && seps.last().is_none_or(|&prev| prev + 1 != i) {
            seps.push(i);
        }
    }
    if seps.is_empty() {
        if block.len() >= 2 && block.iter().all(|(_, l)| l.trim_start().starts_with('|')) {
            out.push(block.to_vec());
        }
        return;
    }
    for (k, &sep) in seps.iter().enumerate() {
        let end = seps.get(k + 1).map_or(block.len(), |&next| next - 1);
        let mut lines = vec![block[sep - 1]];
        lines.extend_from_slice(&block[sep + 1..end.max(sep + 1)]);
        out.push(lines);
    }
}

/// Extracts every pipe-markdown table from `raw`, in document order.
pub fn extract_tables(raw: &str) -> Vec<RawTable> {
    let mut blocks: Vec<Vec<(usize, &str)>> = Vec::new();
    let mut current: Vec<(usize, &str)> = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        if is_candidate(line) {
            current.push((i + 1, line));
        } else if !current.is_empty() {
            blocks.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        blocks.push(current);
    }
    let mut groups = Vec::new();
    for block in &blocks {
        tables_in_block(block, &mut groups);
    }
    groups
        .iter()
        .enumerate()
        .filter_map(|(i, lines)| build_table(lines, i + 1))
        .collect()
}

fn escape_cell(cell: &str) -> String {
    cell.replace('|', "\\|")
}

/// Canonical pipe-markdown rendering of a header and rows.
pub fn render_pipe_table(header: &[String], rows: &[Vec<String>]) -> String {
    let line = |cells: &[String]| {
        let inner = cells.iter().map(|c| escape_cell(c)).collect::<Vec<_>>();
        format!("| {} |\n", inner.join(" | "))
    };
    let mut out = line(header);
    out.push_str(&format!("|{}\n", " --- |".repeat(header.len())));
    for row in rows {
        out.push_str(&line(row));
    }
    out
}

fn names_dimension(header: &str) -> bool {
    let h = header.to_lowercase();
    h.contains("dimension") || h.contains("propert")
}

fn names_definition(header: &str) -> bool {
    let h = header.to_lowercase();
    h.contains("definition") || h.contains("description")
}

/// Appends ` (2)`, ` (3)`, ... until `name` is unused under `key_of`.
fn dedupe(name: &str, taken: &dyn Fn(&str) -> bool) -> String {
    let mut n = 2;
    loop {
        let candidate = format!("{name} ({n})");
        if !taken(&candidate) {
            return candidate;
        }
        n += 1;
    }
}

/// Picks the comparison and definitions tables and aligns their contents.
pub fn classify_and_parse(tables: &[RawTable]) -> Result<ParsedIngest, IngestError> {
    let mut warnings = Vec::new();
    let defs_idx = tables.iter().position(|t| {
        t.header.len() == 2 && names_dimension(&t.header[0]) && names_definition(&t.header[1])
    });
    let mut cmp_idx = tables
        .iter()
        .enumerate()
        .position(|(i, t)| Some(i) != defs_idx && t.header.len() >= 2 && names_dimension(&t.header[0]));
    if cmp_idx.is_none() {
        cmp_idx = tables
            .iter()
            .enumerate()
            .position(|(i, t)| Some(i) != defs_idx && t.header.len() >= 3);
        if let Some(i) = cmp_idx {
            warnings.push(format!(
                "table {}: no header names a dimension column; using it as the comparison",
                i + 1
            ));
        }
    }
    if cmp_idx.is_none() && defs_idx.is_none() {
        return Err(IngestError::NoUsableTable);
    }

    let mut dimensions: Vec<Dimension> = Vec::new();
    let mut columns: Vec<IngestColumn> = Vec::new();

    if let Some(ci) = cmp_idx {
        let table = &tables[ci];
        warnings.extend(table.warnings.iter().cloned());
        for (j, raw_label) in table.header.iter().enumerate().skip(1) {
            let mut label = raw_label.clone();
            if label.is_empty() {
                label = format!("Column {j}");
                warnings.push(format!("column {j} has no label; named `{label}`"));
            }
            if columns.iter().any(|c| c.label == label) {
                let renamed = dedupe(&label, &|l| columns.iter().any(|c| c.label == l));
                warnings.push(format!("duplicate column `{label}` renamed to `{renamed}`"));
                label = renamed;
            }
            columns.push(IngestColumn {
                label,
                cells: Vec::new(),
            });
        }
        for (r, row) in table.rows.iter().enumerate() {
            let mut name = strip_emphasis(&row[0]);
            if name.is_empty() {
                if row[1..].iter().any(|c| !c.is_empty()) {
                    warnings.push(format!(
                        "comparison row {} has no dimension name; skipped",
                        r + 1
                    ));
                }
                continue;
            }
            let taken = |n: &str| {
                let k = dimension_key(n);
                dimensions.iter().any(|d| d.key == k)
            };
            if taken(&name) {
                let renamed = dedupe(&name, &taken);
                warnings.push(format!("duplicate dimension `{name}` renamed to `{renamed}`"));
                name = renamed;
            }
            dimensions.push(Dimension::new(&name, "", Origin::Llm));
            for (c, column) in columns.iter_mut().enumerate() {
                column.cells.push(row[c + 1].clone());
            }
        }
    }

    if let Some(di) = defs_idx {
        let table = &tables[di];
        warnings.extend(table.warnings.iter().cloned());
        let mut seen: Vec<String> = Vec::new();
        let mut linked = vec![false; dimensions.len()];
        for (r, row) in table.rows.iter().enumerate() {
            let mut name = strip_emphasis(&row[0]);
            if name.is_empty() {
                if !row[1].is_empty() {
                    warnings.push(format!(
                        "definitions row {} has no dimension name; skipped",
                        r + 1
                    ));
                }
                continue;
            }
            if seen.contains(&dimension_key(&name)) {
                let renamed = dedupe(&name, &|n| seen.contains(&dimension_key(n)));
                warnings.push(format!("duplicate definition `{name}` renamed to `{renamed}`"));
                name = renamed;
            }
            seen.push(dimension_key(&name));
            let definition = row[1].clone();
            let key = dimension_key(&name);
            match dimensions.iter().position(|d| d.key == key) {
                Some(i) if i < linked.len() && !linked[i] => {
                    linked[i] = true;
                    dimensions[i].definition = definition;
                }
                _ => {
                    if cmp_idx.is_some() {
                        warnings.push(format!(
                            "definition for `{name}` matches no comparison row; kept as a new dimension"
                        ));
                    }
                    dimensions.push(Dimension::new(&name, &definition, Origin::Llm));
                    for column in &mut columns {
                        column.cells.push(String::new());
                    }
                }
            }
        }
    } else if cmp_idx.is_some() {
        warnings.push("no definitions table found; definitions are empty".into());
    }

    for d in &dimensions {
        if let NameCheck::Violation { reason, .. } = validate_dimension_name(&d.name) {
            warnings.push(format!("dimension `{}` needs curation: {reason}", d.name));
        }
    }

    Ok(ParsedIngest {
        comparison_table: cmp_idx.map(|i| tables[i].clone()),
        definitions_table: defs_idx.map(|i| tables[i].clone()),
        dimensions,
        columns,
        warnings,
    })
}

/// `extract_tables` followed by `classify_and_parse`.
pub fn parse_response(raw: &str) -> Result<ParsedIngest, IngestError> {
    classify_and_parse(&extract_tables(raw))
}
