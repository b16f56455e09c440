//! Lenient HTML parsing into a small owned element tree.
//!
//! The parser never fails. Malformed markup is normalized with a handful of
//! behavioral rules rather than the full HTML5 tree-construction algorithm:
//! unclosed elements close at their parent's boundary, stray end tags are
//! dropped, and table-internal tags imply the structure they need.

mod builder;
mod decode;
mod entities;
mod tokenizer;

use std::fmt::Write as _;

pub use decode::{charset_from_content_type, decode_html, is_known_encoding, sniff_meta_charset};
pub use tokenizer::decode_entities;

/// Tag name of the synthetic document root.
pub const ROOT_TAG: &str = "#document";

/// Elements that never have children.
pub(crate) const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
    "track", "wbr",
];

/// Elements whose content is raw text up to the matching end tag.
pub(crate) const RAW_TEXT_ELEMENTS: &[&str] =
    &["script", "style", "textarea", "title", "xmp", "iframe", "noembed", "noframes"];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag)
}

/// Parsed document. The root is always a synthetic [`ROOT_TAG`] element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementTree {
    pub root: Element,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub tag: String,
    /// Attributes in source order; names are lowercase and unique.
    pub attributes: Vec<(String, String)>,
    pub children: Vec<Node>,
}

impl Element {
    pub fn new(tag: impl Into<String>) -> Self {
        Element {
            tag: tag.into(),
            attributes: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn has_attr(&self, name: &str) -> bool {
        self.attributes.iter().any(|(n, _)| n == name)
    }

    /// Adds an attribute unless one with the same name exists (first wins).
    pub fn push_attr(&mut self, name: String, value: String) {
        if !self.has_attr(&name) {
            self.attributes.push((name, value));
        }
    }

    /// Child elements, skipping text nodes.
    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|c| match c {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    /// Depth-first iterator over this element and all descendant elements.
    pub fn descendants(&self) -> Descendants<'_> {
        Descendants { stack: vec![self] }
    }

    pub fn text_content(&self) -> String {
        let mut out = String::new();
        collect_text(self, &mut out);
        out
    }

    pub fn to_html(&self) -> String {
        let mut out = String::new();
        serialize_element(self, &mut out);
        out
    }
}

pub struct Descendants<'a> {
    stack: Vec<&'a Element>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a Element;

    fn next(&mut self) -> Option<&'a Element> {
        let next = self.stack.pop()?;
        let before = self.stack.len();
        self.stack.extend(next.elements());
        self.stack[before..].reverse();
        Some(next)
    }
}

impl Node {
    pub fn text_content(&self) -> String {
        match self {
            Node::Text(t) => t.clone(),
            Node::Element(e) => e.text_content(),
        }
    }
}

/// Concatenation of all descendant text nodes in document order.
pub fn text_content(node: &Node) -> String {
    node.text_content()
}

fn collect_text(element: &Element, out: &mut String) {
    for child in &element.children {
        match child {
            Node::Text(t) => out.push_str(t),
            Node::Element(e) => collect_text(e, out),
        }
    }
}

impl ElementTree {
    /// Serializes the document body (the root's children) back to markup.
    pub fn to_html(&self) -> String {
        let mut out = String::new();
        for child in &self.root.children {
            serialize_node(child, &self.root.tag, &mut out);
        }
        out
    }
}

fn serialize_node(node: &Node, parent_tag: &str, out: &mut String) {
    match node {
        Node::Text(t) if RAW_TEXT_ELEMENTS.contains(&parent_tag) && parent_tag != "textarea" && parent_tag != "title" => {
            out.push_str(t)
        }
        Node::Text(t) => escape_text(t, out),
        Node::Element(e) => serialize_element(e, out),
    }
}

fn serialize_element(e: &Element, out: &mut String) {
    out.push('<');
    out.push_str(&e.tag);
    for (name, value) in &e.attributes {
        let _ = write!(out, " {name}=\"");
        for c in value.chars() {
            match c {
                '&' => out.push_str("&amp;"),
                '"' => out.push_str("&quot;"),
                _ => out.push(c),
            }
        }
        out.push('"');
    }
    out.push('>');
    if is_void(&e.tag) {
        return;
    }
    // A leading newline inside these elements is swallowed by the parser.
    if matches!(e.tag.as_str(), "pre" | "textarea" | "listing") {
        if let Some(Node::Text(t)) = e.children.first() {
            if t.starts_with('\n') {
                out.push('\n');
            }
        }
    }
    for child in &e.children {
        serialize_node(child, &e.tag, out);
    }
    let _ = write!(out, "</{}>", e.tag);
}

fn escape_text(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            _ => out.push(c),
        }
    }
}

/// Parses raw bytes, decoding them with `encoding_hint`, a `<meta charset>`
/// found in the first 1024 bytes, or UTF-8 (in that order).
pub fn parse_html(input: &[u8], encoding_hint: Option<&str>) -> ElementTree {
    let text = decode_html(input, encoding_hint);
    parse_str(&text)
}

/// Parses already-decoded markup.
pub fn parse_str(input: &str) -> ElementTree {
    builder::build(input)
}
