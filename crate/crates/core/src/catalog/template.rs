//! A small placeholder engine for prompt templates.
//!
//! Supported markers:
//!
//! - `{{slot}}` renders a slot with its default renderer.
//! - `{{#each slot sep="\n"}}...{{/each}}` repeats the body per value of a
//!   multi-valued slot. Inside the body, `{{label}}`, `{{body}}`, `{{name}}`,
//!   `{{definition}}`, `{{value}}` and `{{index}}` refer to the current item.
//! - `{{#if slot}}...{{/if}}` keeps the body only when the slot has a value.
//!
//! Values are inserted literally and never re-scanned for markers.

use std::fmt;

use thiserror::Error;

/// Opening marker delimiter.
pub const OPEN: &str = "{{";
/// Closing marker delimiter.
pub const CLOSE: &str = "}}";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("unterminated marker at byte {0}")]
    Unterminated(usize),
    #[error("unexpected `{{{{/{tag}}}}}` at byte {at}")]
    UnexpectedClose { tag: String, at: usize },
    #[error("block `{tag}` opened at byte {at} is never closed")]
    Unclosed { tag: String, at: usize },
    #[error("malformed marker `{marker}` at byte {at}")]
    Malformed { marker: String, at: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Text(String),
    Var(String),
    Each {
        slot: String,
        sep: String,
        body: Vec<Node>,
    },
    If {
        slot: String,
        body: Vec<Node>,
    },
}

/// A parsed template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    nodes: Vec<Node>,
}

/// One item visible inside an `{{#each}}` body.
pub trait Item {
    /// Field lookup; `None` when the item has no such field.
    fn field(&self, name: &str, index: usize) -> Option<String>;
}

/// Source of slot values during rendering.
pub trait Context {
    fn scalar(&self, slot: &str) -> Option<String>;
    fn present(&self, slot: &str) -> bool;
    fn items(&self, slot: &str) -> Vec<Box<dyn Item + '_>>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RenderError {
    UnknownField { slot: String, field: String },
    MissingValue(String),
}

impl fmt::Display for RenderError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenderError::UnknownField { slot, field } => {
                write!(f, "items of `{slot}` have no field `{field}`")
            }
            RenderError::MissingValue(slot) => write!(f, "no value for `{slot}`"),
        }
    }
}

impl std::error::Error for RenderError {}

impl Template {
    pub fn parse(src: &str) -> Result<Self, TemplateError> {
        let mut parser = Parser { src, pos: 0 };
        let (nodes, close) = parser.parse_until(None)?;
        debug_assert!(close.is_none());
        Ok(Template { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Every slot referenced at the top level or by a block, in first-use order.
    pub fn referenced_slots(&self) -> Vec<String> {
        let mut out = Vec::new();
        collect_slots(&self.nodes, false, &mut out);
        out
    }

    /// `(slot, field)` pairs used inside `{{#each}}` bodies.
    pub fn item_fields(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        collect_fields(&self.nodes, None, &mut out);
        out
    }

    pub fn render(&self, ctx: &dyn Context) -> Result<String, RenderError> {
        let mut out = String::new();
        render_nodes(&self.nodes, ctx, None, &mut out)?;
        Ok(out)
    }
}

fn collect_slots(nodes: &[Node], in_each: bool, out: &mut Vec<String>) {
    for node in nodes {
        match node {
            Node::Text(_) => {}
            Node::Var(name) => {
                if !in_each && !out.contains(name) {
                    out.push(name.clone());
                }
            }
            Node::Each { slot, body, .. } => {
                if !out.contains(slot) {
                    out.push(slot.clone());
                }
                collect_slots(body, true, out);
            }
            Node::If { slot, body } => {
                if !out.contains(slot) {
                    out.push(slot.clone());
                }
                collect_slots(body, in_each, out);
            }
        }
    }
}

fn collect_fields(nodes: &[Node], each: Option<&str>, out: &mut Vec<(String, String)>) {
    for node in nodes {
        match node {
            Node::Text(_) => {}
            Node::Var(name) => {
                if let Some(slot) = each {
                    out.push((slot.to_string(), name.clone()));
                }
            }
            Node::Each { slot, body, .. } => collect_fields(body, Some(slot), out),
            Node::If { body, .. } => collect_fields(body, each, out),
        }
    }
}

fn render_nodes(
    nodes: &[Node],
    ctx: &dyn Context,
    item: Option<(&str, &dyn Item, usize)>,
    out: &mut String,
) -> Result<(), RenderError> {
    for node in nodes {
        match node {
            Node::Text(text) => out.push_str(text),
            Node::Var(name) => match item {
                Some((slot, it, index)) => {
                    let value = it.field(name, index).ok_or_else(|| RenderError::UnknownField {
                        slot: slot.to_string(),
                        field: name.clone(),
                    })?;
                    out.push_str(&value);
                }
                None => {
                    let value = ctx
                        .scalar(name)
                        .ok_or_else(|| RenderError::MissingValue(name.clone()))?;
                    out.push_str(&value);
                }
            },
            Node::Each { slot, sep, body } => {
                let items = ctx.items(slot);
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(sep);
                    }
                    render_nodes(body, ctx, Some((slot, it.as_ref(), i + 1)), out)?;
                }
            }
            Node::If { slot, body } => {
                if ctx.present(slot) {
                    render_nodes(body, ctx, item, out)?;
                }
            }
        }
    }
    Ok(())
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

enum Tag {
    Var(String),
    OpenEach { slot: String, sep: String },
    OpenIf(String),
    Close(String),
}

impl Parser<'_> {
    /// Parses nodes until end of input (`closing == None`) or the matching close tag.
    fn parse_until(
        &mut self,
        closing: Option<(&str, usize)>,
    ) -> Result<(Vec<Node>, Option<String>), TemplateError> {
        let mut nodes = Vec::new();
        loop {
            let rest = &self.src[self.pos..];
            let Some(start) = rest.find(OPEN) else {
                if !rest.is_empty() {
                    nodes.push(Node::Text(rest.to_string()));
                }
                self.pos = self.src.len();
                return match closing {
                    Some((tag, at)) => Err(TemplateError::Unclosed {
                        tag: tag.to_string(),
                        at,
                    }),
                    None => Ok((nodes, None)),
                };
            };
            if start > 0 {
                nodes.push(Node::Text(rest[..start].to_string()));
            }
            let marker_at = self.pos + start;
            let inner_start = marker_at + OPEN.len();
            let Some(end) = self.src[inner_start..].find(CLOSE) else {
                return Err(TemplateError::Unterminated(marker_at));
            };
            let inner = &self.src[inner_start..inner_start + end];
            self.pos = inner_start + end + CLOSE.len();
            match parse_tag(inner).ok_or_else(|| TemplateError::Malformed {
                marker: inner.to_string(),
                at: marker_at,
            })? {
                Tag::Var(name) => nodes.push(Node::Var(name)),
                Tag::OpenEach { slot, sep } => {
                    let (body, _) = self.parse_until(Some(("each", marker_at)))?;
                    nodes.push(Node::Each { slot, sep, body });
                }
                Tag::OpenIf(slot) => {
                    let (body, _) = self.parse_until(Some(("if", marker_at)))?;
                    nodes.push(Node::If { slot, body });
                }
                Tag::Close(tag) => match closing {
                    Some((expected, _)) if expected == tag => return Ok((nodes, Some(tag))),
                    _ => {
                        return Err(TemplateError::UnexpectedClose {
                            tag,
                            at: marker_at,
                        })
                    }
                },
            }
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_tag(inner: &str) -> Option<Tag> {
    let inner = inner.trim();
    if let Some(rest) = inner.strip_prefix("#each") {
        let rest = rest.trim_start();
        let (slot, attrs) = match rest.find(char::is_whitespace) {
            Some(i) => (&rest[..i], rest[i..].trim()),
            None => (rest, ""),
        };
        if !is_ident(slot) {
            return None;
        }
        let sep = if attrs.is_empty() {
            String::new()
        } else {
            let quoted = attrs.strip_prefix("sep=")?;
            let body = quoted.strip_prefix('"')?.strip_suffix('"')?;
            unescape(body)?
        };
        return Some(Tag::OpenEach {
            slot: slot.to_string(),
            sep,
        });
    }
    if let Some(rest) = inner.strip_prefix("#if") {
        let slot = rest.trim();
        return is_ident(slot).then(|| Tag::OpenIf(slot.to_string()));
    }
    if let Some(rest) = inner.strip_prefix('/') {
        let tag = rest.trim();
        return matches!(tag, "each" | "if").then(|| Tag::Close(tag.to_string()));
    }
    is_ident(inner).then(|| Tag::Var(inner.to_string()))
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                '"' => out.push('"'),
                '\\' => out.push('\\'),
                _ => return None,
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// True when `text` contains something shaped like a marker.
pub fn has_marker(text: &str) -> bool {
    text.find(OPEN)
        .is_some_and(|i| text[i + OPEN.len()..].contains(CLOSE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    struct Value(String);

    impl Item for Value {
        fn field(&self, name: &str, index: usize) -> Option<String> {
            match name {
                "value" => Some(self.0.clone()),
                "index" => Some(index.to_string()),
                _ => None,
            }
        }
    }

    #[derive(Default)]
    struct Map {
        scalars: HashMap<&'static str, String>,
        lists: HashMap<&'static str, Vec<String>>,
    }

    impl Context for Map {
        fn scalar(&self, slot: &str) -> Option<String> {
            self.scalars
                .get(slot)
                .cloned()
                .or_else(|| self.lists.get(slot).map(|l| l.join(", ")))
        }
        fn present(&self, slot: &str) -> bool {
            self.scalars.contains_key(slot) || self.lists.get(slot).is_some_and(|l| !l.is_empty())
        }
        fn items(&self, slot: &str) -> Vec<Box<dyn Item + '_>> {
            self.lists
                .get(slot)
                .map(|l| {
                    l.iter()
                        .map(|v| Box::new(Value(v.clone())) as Box<dyn Item>)
                        .collect()
                })
                .unwrap_or_default()
        }
    }

    #[test]
    fn renders_vars_blocks_and_separators() {
        let t = Template::parse(
            r#"Hi {{name}}.{{#if xs}} Items: {{#each xs sep=", "}}{{index}}={{value}}{{/each}}.{{/if}}"#,
        )
        .unwrap();
        let mut ctx = Map::default();
        ctx.scalars.insert("name", "Sarah".into());
        assert_eq!(t.render(&ctx).unwrap(), "Hi Sarah.");
        ctx.lists.insert("xs", vec!["a".into(), "b".into()]);
        assert_eq!(t.render(&ctx).unwrap(), "Hi Sarah. Items: 1=a, 2=b.");
        assert_eq!(t.referenced_slots(), vec!["name", "xs"]);
        assert_eq!(
            t.item_fields(),
            vec![("xs".to_string(), "index".to_string()), ("xs".into(), "value".into())]
        );
    }

    #[test]
    fn values_are_not_reexpanded() {
        let t = Template::parse("{{name}}").unwrap();
        let mut ctx = Map::default();
        ctx.scalars.insert("name", "{{name}}".into());
        assert_eq!(t.render(&ctx).unwrap(), "{{name}}");
    }

    #[test]
    fn sep_escapes() {
        let t = Template::parse(r#"{{#each xs sep="\n\n"}}{{value}}{{/each}}"#).unwrap();
        let mut ctx = Map::default();
        ctx.lists.insert("xs", vec!["a".into(), "b".into()]);
        assert_eq!(t.render(&ctx).unwrap(), "a\n\nb");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Template::parse("a {{b").unwrap_err(),
            TemplateError::Unterminated(2)
        );
        assert!(matches!(
            Template::parse("{{#if a}}x").unwrap_err(),
            TemplateError::Unclosed { .. }
        ));
        assert!(matches!(
            Template::parse("{{/each}}").unwrap_err(),
            TemplateError::UnexpectedClose { .. }
        ));
        assert!(matches!(
            Template::parse("{{#if a}}x{{/each}}").unwrap_err(),
            TemplateError::UnexpectedClose { .. }
        ));
        assert!(matches!(
            Template::parse("{{insert text}}").unwrap_err(),
            TemplateError::Malformed { .. }
        ));
    }

    #[test]
    fn marker_detection() {
        assert!(has_marker("x {{a}} y"));
        assert!(!has_marker("x {a} y"));
        assert!(!has_marker("}} then {{"));
    }
}
