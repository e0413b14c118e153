use proptest::prelude::*;
use raforge_core::ingest::{extract_tables, render_pipe_table};

fn normalize(raw: &str) -> String {
    extract_tables(raw)
        .iter()
        .map(|t| render_pipe_table(&t.header, &t.rows))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cell() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9,|()\\\\ -]{0,10}".prop_map(|s| s.trim().to_string())
}

fn first_cell() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9 ]{0,8}".prop_map(|s| s.trim().to_string())
}

#[derive(Debug, Clone)]
struct Messy {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    outer: Vec<bool>,
    pad: Vec<usize>,
}

fn messy_table() -> impl Strategy<Value = Messy> {
    (2usize..5, 0usize..6).prop_flat_map(|(w, n)| {
        (
            proptest::collection::vec(first_cell(), w),
            proptest::collection::vec(
                (first_cell(), proptest::collection::vec(cell(), 0..w + 2)),
                n,
            ),
            proptest::collection::vec(any::<bool>(), n + 2),
            proptest::collection::vec(0usize..3, n + 2),
        )
            .prop_map(|(header, rows, outer, pad)| Messy {
                header,
                rows: rows
                    .into_iter()
                    .map(|(first, rest)| std::iter::once(first).chain(rest).collect())
                    .collect(),
                outer,
                pad,
            })
    })
}

fn escape(c: &str) -> String {
    c.replace('|', "\\|")
}

impl Messy {
    fn line(&self, i: usize, cells: &[String]) -> String {
        let sep = format!("{}|{}", " ".repeat(self.pad[i]), " ".repeat(self.pad[i]));
        let inner = cells.iter().map(|c| escape(c)).collect::<Vec<_>>().join(&sep);
        if self.outer[i] { format!("|{sep}{inner}{sep}|") } else { inner }
    }

    fn render(&self) -> String {
        let mut out = vec![self.line(0, &self.header)];
        out.push(vec!["---"; self.header.len()].join("|"));
        for (i, row) in self.rows.iter().enumerate() {
            out.push(self.line(i + 2, row));
        }
        out.join("\n")
    }
}

proptest! {
    #[test]
    fn canonical_rendering_round_trips(t in messy_table()) {
        let w = t.header.len();
        let rows: Vec<Vec<String>> = t.rows.iter().map(|r| {
            let mut r = r.clone();
            r.resize(w, String::new());
            r
        }).collect();
        let text = render_pipe_table(&t.header, &rows);
        let tables = extract_tables(&text);
        prop_assert_eq!(tables.len(), 1);
        prop_assert_eq!(&tables[0].header, &t.header);
        prop_assert_eq!(&tables[0].rows, &rows);
    }

    #[test]
    fn normalization_is_idempotent(t in messy_table(), prose in "[a-z .]{0,30}") {
        let raw = format!("{prose}\n\n{}\n\n{prose}", t.render());
        let once = normalize(&raw);
        prop_assert!(!once.is_empty());
        prop_assert_eq!(normalize(&once), once.clone());
    }
}
