//! Output formats for a [`RenderedDocument`].

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::annotate::Annotation;
use crate::flow::RenderedDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExportFormat {
    Plain,
    Xml,
    Html,
    Jsonl,
}

impl ExportFormat {
    pub const ALL: [ExportFormat; 4] = [ExportFormat::Plain, ExportFormat::Xml, ExportFormat::Html, ExportFormat::Jsonl];

    pub fn name(self) -> &'static str {
        match self {
            ExportFormat::Plain => "plain",
            ExportFormat::Xml => "xml",
            ExportFormat::Html => "html",
            ExportFormat::Jsonl => "jsonl",
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown postprocessor {0:?} (expected one of: plain, xml, html, jsonl)")]
pub struct UnknownFormat(pub String);

impl FromStr for ExportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ExportFormat::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| UnknownFormat(s.to_string()))
    }
}

/// Turns a rendered document into an output string.
pub trait PostProcessor: Send + Sync {
    fn name(&self) -> &str;
    fn process(&self, document: &RenderedDocument) -> String;
}

struct Builtin(ExportFormat);

impl PostProcessor for Builtin {
    fn name(&self) -> &str {
        self.0.name()
    }

    fn process(&self, document: &RenderedDocument) -> String {
        export(document, self.0)
    }
}

/// Named post-processors. Starts with the four built-in formats; more can be
/// registered under new names or replace existing ones.
pub struct Registry {
    processors: BTreeMap<String, Box<dyn PostProcessor>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut registry = Registry {
            processors: BTreeMap::new(),
        };
        for format in ExportFormat::ALL {
            registry.register(Box::new(Builtin(format)));
        }
        registry
    }
}

impl Registry {
    pub fn register(&mut self, processor: Box<dyn PostProcessor>) {
        self.processors.insert(processor.name().to_string(), processor);
    }

    pub fn get(&self, name: &str) -> Option<&dyn PostProcessor> {
        self.processors.get(name).map(Box::as_ref)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.processors.keys().map(String::as_str)
    }
}

pub fn export(document: &RenderedDocument, format: ExportFormat) -> String {
    match format {
        ExportFormat::Plain => to_plain(document),
        ExportFormat::Xml => to_xml(document),
        ExportFormat::Html => to_surface_html(document),
        ExportFormat::Jsonl => to_jsonl(document),
    }
}

pub fn to_plain(document: &RenderedDocument) -> String {
    document.text.clone()
}

fn escape_into(out: &mut String, text: &str, quotes: bool) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if quotes => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

/// Maps a label onto a valid XML element name.
pub fn xml_name(label: &str) -> String {
    let mut name: String = label
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let starts_ok = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_');
    if !starts_ok || name.len() >= 3 && name[..3].eq_ignore_ascii_case("xml") {
        name.insert(0, '_');
    }
    name
}

/// Splits annotations into properly nested, non-empty spans. A span that
/// crosses the end of an earlier open span is cut there and the rest is
/// queued again.
pub fn nest_annotations(annotations: &[Annotation], text_len: usize) -> Vec<Annotation> {
    let mut sorted: Vec<Annotation> = annotations
        .iter()
        .filter(|a| a.start < a.end.min(text_len))
        .map(|a| Annotation::new(a.start, a.end.min(text_len), a.label.clone()))
        .collect();
    crate::annotate::sort_annotations(&mut sorted);
    let mut queue: VecDeque<Annotation> = sorted.into();
    let mut out = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    while let Some(a) = queue.pop_front() {
        while open.last().is_some_and(|&end| end <= a.start) {
            open.pop();
        }
        match open.last() {
            Some(&end) if a.end > end => {
                let head = Annotation::new(a.start, end, a.label.clone());
                let tail = Annotation::new(end, a.end, a.label);
                let at = queue
                    .iter()
                    .position(|q| (q.start, std::cmp::Reverse(q.end)) > (tail.start, std::cmp::Reverse(tail.end)))
                    .unwrap_or(queue.len());
                queue.insert(at, tail);
                open.push(head.end);
                out.push(head);
            }
            _ => {
                open.push(a.end);
                out.push(a);
            }
        }
    }
    out
}

/// Inline XML with one element per (nested) annotation, wrapped in `<document>`.
pub fn to_xml(document: &RenderedDocument) -> String {
    let chars: Vec<char> = document.text.chars().collect();
    let spans = nest_annotations(&document.annotations, chars.len());
    let mut out = String::with_capacity(document.text.len() + 32 + spans.len() * 16);
    out.push_str("<document>");
    let mut stack: Vec<(usize, String)> = Vec::new();
    let mut pos = 0;
    let mut buf = String::new();
    let mut flush = |out: &mut String, from: usize, to: usize| {
        if from < to {
            buf.clear();
            buf.extend(&chars[from..to]);
            escape_into(out, &buf, false);
        }
    };
    for span in &spans {
        while let Some((end, name)) = stack.last() {
            if *end > span.start {
                break;
            }
            flush(&mut out, pos, *end);
            pos = *end;
            out.push_str(&format!("</{name}>"));
            stack.pop();
        }
        flush(&mut out, pos, span.start);
        pos = span.start;
        let name = xml_name(&span.label);
        out.push_str(&format!("<{name}>"));
        stack.push((span.end, name));
    }
    while let Some((end, name)) = stack.pop() {
        flush(&mut out, pos, end);
        pos = end;
        out.push_str(&format!("</{name}>"));
    }
    flush(&mut out, pos, chars.len());
    out.push_str("</document>");
    out
}

const PALETTE: [&str; 12] = [
    "#ffd8b1", "#fffac8", "#aaffc3", "#dcbeff", "#b5e3ff", "#ffb3ba", "#c7f0bd", "#f9d5e5", "#e2f0cb", "#ffdfba",
    "#d0d1ff", "#e0e0e0",
];

fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Stable color for a label.
pub fn label_color(label: &str) -> &'static str {
    PALETTE[(fnv1a(label) % PALETTE.len() as u64) as usize]
}

/// CSS class name for a label.
pub fn label_class(label: &str) -> String {
    let slug: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect();
    format!("label-{slug}")
}

/// A standalone HTML page showing the text with labeled spans highlighted.
pub fn to_surface_html(document: &RenderedDocument) -> String {
    let chars: Vec<char> = document.text.chars().collect();
    let spans = nest_annotations(&document.annotations, chars.len());
    let labels: std::collections::BTreeSet<&str> = spans.iter().map(|a| a.label.as_str()).collect();

    let mut out = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<style>\npre { white-space: pre; font-family: monospace; }\n",
    );
    for label in &labels {
        out.push_str(&format!(
            ".{} {{ background-color: {}; }}\n",
            label_class(label),
            label_color(label)
        ));
    }
    out.push_str("</style>\n</head>\n<body>\n<pre>\n");

    let mut stack: Vec<usize> = Vec::new();
    let mut pos = 0;
    let mut buf = String::new();
    let mut flush = |out: &mut String, from: usize, to: usize| {
        if from < to {
            buf.clear();
            buf.extend(&chars[from..to]);
            escape_into(out, &buf, false);
        }
    };
    for span in &spans {
        while let Some(&end) = stack.last() {
            if end > span.start {
                break;
            }
            flush(&mut out, pos, end);
            pos = end;
            out.push_str("</span>");
            stack.pop();
        }
        flush(&mut out, pos, span.start);
        pos = span.start;
        out.push_str(&format!("<span class=\"{}\" title=\"", label_class(&span.label)));
        escape_into(&mut out, &span.label, true);
        out.push_str("\">");
        stack.push(span.end);
    }
    while let Some(end) = stack.pop() {
        flush(&mut out, pos, end);
        pos = end;
        out.push_str("</span>");
    }
    flush(&mut out, pos, chars.len());
    out.push_str("</pre>\n</body>\n</html>\n");
    out
}

#[derive(Serialize)]
struct JsonlRecord<'a> {
    text: &'a str,
    label: Vec<(usize, usize, &'a str)>,
}

/// One JSON object per document: `{"text": ..., "label": [[start, end, label], ...]}`.
pub fn to_jsonl(document: &RenderedDocument) -> String {
    let record = JsonlRecord {
        text: &document.text,
        label: document
            .annotations
            .iter()
            .map(|a| (a.start, a.end, a.label.as_str()))
            .collect(),
    };
    let mut line = serde_json::to_string(&record).expect("serializing strings and integers cannot fail");
    line.push('\n');
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str, annotations: &[(usize, usize, &str)]) -> RenderedDocument {
        RenderedDocument {
            text: text.to_string(),
            annotations: annotations.iter().map(|&(s, e, l)| Annotation::new(s, e, l)).collect(),
        }
    }

    fn body(xml: &str) -> &str {
        xml.strip_prefix("<document>").unwrap().strip_suffix("</document>").unwrap()
    }

    #[test]
    fn format_names() {
        for f in ExportFormat::ALL {
            assert_eq!(f.name().parse::<ExportFormat>().unwrap(), f);
        }
        assert!("PLAIN".parse::<ExportFormat>().is_err());
    }

    #[test]
    fn xml_examples() {
        assert_eq!(to_xml(&doc("bold\n", &[(0, 4, "emphasis")])), "<document><emphasis>bold</emphasis>\n</document>");
        assert_eq!(to_xml(&doc("a\n", &[])), "<document>a\n</document>");
        assert_eq!(to_xml(&doc("a&b\n", &[])), "<document>a&amp;b\n</document>");
    }

    #[test]
    fn xml_nested_and_escaped() {
        let d = doc("a<b & c\n", &[(0, 7, "outer"), (2, 3, "inner")]);
        assert_eq!(body(&to_xml(&d)), "<outer>a&lt;<inner>b</inner> &amp; c</outer>\n");
    }

    #[test]
    fn xml_overlap_is_split() {
        let d = doc("abcdef", &[(0, 4, "x"), (2, 6, "y")]);
        assert_eq!(body(&to_xml(&d)), "<x>ab<y>cd</y></x><y>ef</y>");
    }

    #[test]
    fn xml_labels_become_names() {
        assert_eq!(xml_name("heading"), "heading");
        assert_eq!(xml_name("my label"), "my_label");
        assert_eq!(xml_name("1st"), "_1st");
        assert_eq!(xml_name("xmlish"), "_xmlish");
    }

    #[test]
    fn nesting_keeps_coverage() {
        let a = [
            Annotation::new(0, 5, "a"),
            Annotation::new(1, 8, "b"),
            Annotation::new(3, 10, "c"),
            Annotation::new(4, 4, "empty"),
        ];
        let nested = nest_annotations(&a, 10);
        for label in ["a", "b", "c"] {
            let orig = a.iter().find(|x| x.label == label).unwrap();
            let covered: Vec<usize> = nested
                .iter()
                .filter(|x| x.label == label)
                .flat_map(|x| x.start..x.end)
                .collect();
            assert_eq!(covered, (orig.start..orig.end).collect::<Vec<_>>(), "{label}");
        }
        for (i, x) in nested.iter().enumerate() {
            for y in &nested[i + 1..] {
                let disjoint = x.end <= y.start || y.end <= x.start;
                let contains = x.start <= y.start && y.end <= x.end || y.start <= x.start && x.end <= y.end;
                assert!(disjoint || contains, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn jsonl_line() {
        let d = doc("hé \"x\"\n", &[(0, 2, "w")]);
        let line = to_jsonl(&d);
        assert!(line.ends_with('\n') && !line[..line.len() - 1].contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["text"], "hé \"x\"\n");
        assert_eq!(v["label"], serde_json::json!([[0, 2, "w"]]));
    }

    #[test]
    fn html_page() {
        let d = doc("a<b\n", &[(0, 1, "x y")]);
        let page = to_surface_html(&d);
        assert!(page.starts_with("<!DOCTYPE html>"));
        assert!(page.contains(".label-x_y { background-color: #"));
        assert!(page.contains("<pre>\n<span class=\"label-x_y\" title=\"x y\">a</span>&lt;b\n</pre>"));
        assert_eq!(label_color("x y"), label_color("x y"));
    }

    #[test]
    fn registry_lookup() {
        let registry = Registry::default();
        assert_eq!(registry.names().collect::<Vec<_>>(), ["html", "jsonl", "plain", "xml"]);
        let d = doc("t\n", &[]);
        assert_eq!(registry.get("plain").unwrap().process(&d), "t\n");
        assert!(registry.get("csv").is_none());
    }
}
