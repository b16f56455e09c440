//! Generators and independent checkers shared by the property and
//! acceptance tests. The checkers never call into the layout code: they
//! work from the DOM, from regexes, or from plain string arithmetic.
#![allow(dead_code)]

use std::sync::LazyLock;

use htmlflow::dom::{text_content, Element, ElementTree, Node};
use htmlflow::{Annotation, RenderedDocument};
use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use regex::Regex;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- oracles

static HTML_WHITESPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new("[ \t\n\r\x0c]+").unwrap());
static ANY_WHITESPACE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());
static TAG: LazyLock<Regex> = LazyLock::new(|| Regex::new("<[^>]*>").unwrap());

/// Regex-based collapse: runs of HTML whitespace become one space, ends trimmed.
pub fn collapse(text: &str) -> String {
    HTML_WHITESPACE
        .replace_all(text, " ")
        .trim_matches(' ')
        .to_string()
}

pub fn strip_all_whitespace(text: &str) -> String {
    ANY_WHITESPACE.replace_all(text, "").into_owned()
}

/// Expected output for an inline-only document.
pub fn inline_oracle(tree: &ElementTree) -> String {
    let collapsed = collapse(&tree.root.text_content());
    if collapsed.is_empty() {
        collapsed
    } else {
        collapsed + "\n"
    }
}

/// Removes markup from exported XML and undoes the three escapes.
pub fn unwrap_xml(xml: &str) -> String {
    TAG.replace_all(xml, "")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&amp;", "&")
}

pub fn chars_between(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end - start).collect()
}

// ------------------------------------------------------------- invariants

/// Whether `html` may legitimately render with a leading empty line: an
/// explicit `<br>` or preserved newlines can produce one, margins cannot.
pub fn may_start_with_break(html: &str) -> bool {
    let lower = html.to_ascii_lowercase();
    ["br", "pre", "listing", "xmp", "plaintext"].iter().any(|t| lower.contains(t))
}

/// Structural checks every rendered document must pass.
pub fn check_document(doc: &RenderedDocument, allow_leading_break: bool) -> Result<(), String> {
    let text = &doc.text;
    if !text.is_empty() && !text.ends_with('\n') {
        return Err("non-empty output does not end with a newline".into());
    }
    if text.ends_with("\n\n") {
        return Err("trailing blank line".into());
    }
    if !allow_leading_break && text.starts_with('\n') {
        return Err("leading blank line".into());
    }
    for (i, line) in text.split('\n').enumerate() {
        if line.ends_with(' ') {
            return Err(format!("line {i} has trailing spaces: {line:?}"));
        }
    }
    check_annotations(text, &doc.annotations)
}

pub fn check_annotations(text: &str, annotations: &[Annotation]) -> Result<(), String> {
    let chars: Vec<char> = text.chars().collect();
    for a in annotations {
        if !(a.start < a.end && a.end <= chars.len()) {
            return Err(format!("span out of bounds or empty: {a:?} (len {})", chars.len()));
        }
        if chars[a.start].is_whitespace() || chars[a.end - 1].is_whitespace() {
            return Err(format!("span not trimmed: {a:?} {:?}", chars_between(text, a.start, a.end)));
        }
    }
    for pair in annotations.windows(2) {
        let key = |a: &Annotation| (a.start, std::cmp::Reverse(a.end), a.label.clone());
        if key(&pair[0]) > key(&pair[1]) {
            return Err(format!("annotations not sorted: {:?} before {:?}", pair[0], pair[1]));
        }
    }
    Ok(())
}

// ----------------------------------------------------------------- tables

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Default,
    Left,
    Right,
    Center,
}

impl Align {
    fn attr(self) -> &'static str {
        match self {
            Align::Default => "",
            Align::Left => r#" align="left""#,
            Align::Right => r#" align="right""#,
            Align::Center => r#" align="center""#,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridTable {
    pub cells: Vec<Vec<(String, Align)>>,
}

impl GridTable {
    /// 1-6 rows, 1-5 columns, cell text of length 0-12, random `align`.
    pub fn random(rng: &mut StdRng) -> Self {
        const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789.-+%";
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=5);
        let cells = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| {
                        let len = rng.random_range(0..=12);
                        let text: String = (0..len).map(|_| *ALPHABET.choose(rng).unwrap() as char).collect();
                        let align = *[Align::Default, Align::Left, Align::Right, Align::Center].choose(rng).unwrap();
                        (text, align)
                    })
                    .collect()
            })
            .collect();
        GridTable { cells }
    }

    pub fn to_html(&self) -> String {
        let mut html = String::from("<table>\n");
        for row in &self.cells {
            html.push_str("  <tr>");
            for (text, align) in row {
                html.push_str(&format!("<td{}>{}</td>", align.attr(), text));
            }
            html.push_str("</tr>\n");
        }
        html.push_str("</table>\n");
        html
    }

    /// Checks that every column's content region starts at one fixed
    /// character column on every row line, with content placed according
    /// to its alignment and only spaces elsewhere.
    pub fn check_alignment(&self, rendered: &str) -> Result<(), String> {
        let cols = self.cells[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| self.cells.iter().map(|r| r[c].0.chars().count()).max().unwrap())
            .collect();
        let starts: Vec<usize> = widths
            .iter()
            .scan(0, |x, w| {
                let s = *x;
                *x += w + 2;
                Some(s)
            })
            .collect();
        let expected_rows: Vec<&Vec<(String, Align)>> =
            self.cells.iter().filter(|r| r.iter().any(|(t, _)| !t.is_empty())).collect();
        let lines: Vec<&str> = rendered.strip_suffix('\n').unwrap_or(rendered).split('\n').collect();
        let lines: Vec<&str> = if rendered.is_empty() { vec![] } else { lines };
        if lines.len() != expected_rows.len() {
            return Err(format!("expected {} lines, got {}:\n{rendered}", expected_rows.len(), lines.len()));
        }
        let total = starts[cols - 1] + widths[cols - 1];
        for (line, row) in lines.iter().zip(expected_rows) {
            let mut padded: Vec<char> = line.chars().collect();
            if padded.len() > total {
                return Err(format!("line too long: {line:?}"));
            }
            padded.resize(total, ' ');
            let mut covered = vec![false; total];
            for (c, (text, align)) in row.iter().enumerate() {
                let len = text.chars().count();
                let offset = match align {
                    Align::Right => widths[c] - len,
                    Align::Center => (widths[c] - len) / 2,
                    _ => 0,
                };
                let at = starts[c] + offset;
                let found: String = padded[at..at + len].iter().collect();
                if &found != text {
                    return Err(format!("column {c} expected {text:?} at {at}, found {found:?} in {line:?}"));
                }
                covered[at..at + len].iter_mut().for_each(|x| *x = true);
            }
            if padded.iter().zip(&covered).any(|(ch, cov)| !cov && *ch != ' ') {
                return Err(format!("stray glyphs outside cell regions: {line:?}"));
            }
        }
        Ok(())
    }
}

/// Renders the children of a cell as a standalone document and returns its
/// lines, or an empty list for empty output.
fn standalone_lines(cell: &Element, render: &dyn Fn(&ElementTree) -> String) -> Vec<String> {
    let mut root = Element::new(htmlflow::dom::ROOT_TAG);
    root.children = cell.children.clone();
    let text = render(&ElementTree { root });
    match text.strip_suffix('\n') {
        None => Vec::new(),
        Some(body) => body.split('\n').map(str::to_string).collect(),
    }
}

fn child_elements<'a>(e: &'a Element, tags: &'a [&str]) -> impl Iterator<Item = &'a Element> + 'a {
    e.children.iter().filter_map(move |n| match n {
        Node::Element(c) if tags.contains(&c.tag.as_str()) => Some(c),
        _ => None,
    })
}

fn table_rows(table: &Element) -> Vec<&Element> {
    let mut rows = Vec::new();
    for child in table.children.iter() {
        if let Node::Element(e) = child {
            match e.tag.as_str() {
                "tr" => rows.push(e),
                "thead" | "tbody" | "tfoot" => rows.extend(child_elements(e, &["tr"])),
                _ => {}
            }
        }
    }
    rows
}

/// Checks that `table`'s rendering is the padded grid of its cells'
/// standalone renderings: each cell block sits contiguously inside its row's
/// line range, at its column's start (offset by alignment), and each column
/// starts at the same character column on every line. Applied recursively
/// to every nested table.
pub fn check_table_containment(table: &Element, render: &dyn Fn(&ElementTree) -> String) -> Result<(), String> {
    let rows: Vec<Vec<(&Element, Vec<String>)>> = table_rows(table)
        .into_iter()
        .map(|tr| {
            child_elements(tr, &["td", "th"])
                .map(|td| (td, standalone_lines(td, render)))
                .collect()
        })
        .collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let width = |lines: &[String]| lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|(_, l)| width(l)).max().unwrap_or(0))
        .collect();
    let mut starts = Vec::new();
    let mut x = 0;
    for w in &widths {
        starts.push(x);
        x += w + 2;
    }

    let mut table_root = Element::new(htmlflow::dom::ROOT_TAG);
    table_root.children.push(Node::Element(table.clone()));
    let rendered = render(&ElementTree { root: table_root });
    let lines: Vec<&str> = match rendered.strip_suffix('\n') {
        None => Vec::new(),
        Some(body) => body.split('\n').collect(),
    };

    // Captions render as plain blocks above the grid.
    let mut top: usize = child_elements(table, &["caption"])
        .map(|caption| {
            let mut wrapper = Element::new("div");
            wrapper.children = caption.children.clone();
            standalone_lines(&wrapper, render).len()
        })
        .sum();
    for (r, row) in rows.iter().enumerate() {
        let height = row.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
        for (c, (td, cell_lines)) in row.iter().enumerate() {
            let align = td.attr("align").map(str::to_ascii_lowercase);
            let align = align.as_deref().unwrap_or(if td.tag == "th" { "center" } else { "left" });
            let valign = td.attr("valign").map(str::to_ascii_lowercase);
            let first = match valign.as_deref() {
                Some("bottom") => height - cell_lines.len(),
                Some("middle") => (height - cell_lines.len()) / 2,
                _ => 0,
            };
            for (i, cell_line) in cell_lines.iter().enumerate() {
                let len = cell_line.chars().count();
                let offset = match align {
                    "right" => widths[c] - len,
                    "center" => (widths[c] - len) / 2,
                    _ => 0,
                };
                let line_no = top + first + i;
                let line: Vec<char> = lines
                    .get(line_no)
                    .ok_or_else(|| format!("row {r} cell {c}: missing line {line_no}"))?
                    .chars()
                    .collect();
                let at = starts[c] + offset;
                let found: String = line.iter().skip(at).take(len).collect();
                if found.trim_end() != cell_line.trim_end() {
                    return Err(format!(
                        "row {r} cell {c} line {i}: expected {cell_line:?} at column {at}, found {found:?}\n{rendered}"
                    ));
                }
                if at > 0 && line.len() > at && line[at - 1] != ' ' && c > 0 && offset == 0 {
                    return Err(format!("row {r} cell {c}: no separator before column {at}"));
                }
            }
        }
        top += height;
    }
    if top != lines.len() {
        return Err(format!("expected {top} lines, got {}\n{rendered}", lines.len()));
    }
    for row in &rows {
        for (td, _) in row {
            for nested in td.descendants().filter(|e| e.tag == "table") {
                check_table_containment(nested, render)?;
            }
        }
    }
    Ok(())
}

// ------------------------------------------------------ inline documents

const INLINE_TAGS: &[&str] = &["b", "i", "em", "strong", "span", "a", "u", "small", "code", "sub", "sup"];

fn random_text(rng: &mut StdRng) -> String {
    const PIECES: &[&str] = &[
        " ", "  ", "\t", "\n", "\r\n", "\x0c", " \n ", "word", "x", "Hello", "42", "é", "ünïcode", "a&amp;b",
        "&lt;", "&nbsp;", "-", ".", ",",
    ];
    let n = rng.random_range(0..6);
    (0..n).map(|_| *PIECES.choose(rng).unwrap()).collect()
}

fn random_inline(rng: &mut StdRng, depth: usize, out: &mut String) {
    let n = rng.random_range(0..5);
    for _ in 0..n {
        if depth < 4 && rng.random_bool(0.4) {
            let tag = INLINE_TAGS.choose(rng).unwrap();
            out.push_str(&format!("<{tag}>"));
            random_inline(rng, depth + 1, out);
            out.push_str(&format!("</{tag}>"));
        } else {
            out.push_str(&random_text(rng));
        }
    }
}

/// A document made only of text and inline elements.
pub fn random_inline_document(rng: &mut StdRng) -> String {
    let mut out = String::new();
    random_inline(rng, 0, &mut out);
    out
}

// --------------------------------------------------- annotated documents

pub const RULE_SELECTORS: &[&str] = &["h1", "b", "td", "div", "table#id=x"];

/// Picks a non-empty random subset of [`RULE_SELECTORS`]; label = selector.
pub fn random_rules(rng: &mut StdRng) -> Vec<&'static str> {
    loop {
        let chosen: Vec<&str> = RULE_SELECTORS.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if !chosen.is_empty() {
            return chosen;
        }
    }
}

pub fn rules_json(selectors: &[&str]) -> String {
    let map: serde_json::Map<String, serde_json::Value> = selectors
        .iter()
        .map(|s| (s.to_string(), serde_json::json!([label_for(s)])))
        .collect();
    serde_json::Value::Object(map).to_string()
}

pub fn label_for(selector: &str) -> String {
    format!("L-{}", selector.replace(['#', '='], "_"))
}

fn random_words(rng: &mut StdRng) -> String {
    const WORDS: &[&str] = &["alpha", "beta", "x", "y z", "12", "Ω", " ", "  ", "\n"];
    let n = rng.random_range(0..4);
    (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect()
}

/// Inline content, possibly containing `b`.
fn random_phrase(rng: &mut StdRng, out: &mut String) {
    for _ in 0..rng.random_range(0..4) {
        if rng.random_bool(0.3) {
            out.push_str("<b>");
            out.push_str(&random_words(rng));
            if rng.random_bool(0.3) {
                out.push_str("<b>");
                out.push_str(&random_words(rng));
                out.push_str("</b>");
            }
            out.push_str("</b>");
        } else {
            out.push_str(&random_words(rng));
        }
    }
}

/// Cell content rendering as at most one line.
fn random_cell(rng: &mut StdRng, out: &mut String) {
    match rng.random_range(0..4) {
        0 => {
            out.push_str("<div>");
            random_phrase(rng, out);
            out.push_str("</div>");
        }
        1 => {
            out.push_str("<h1>");
            random_phrase(rng, out);
            out.push_str("</h1>");
        }
        _ => random_phrase(rng, out),
    }
}

fn random_table(rng: &mut StdRng, out: &mut String) {
    if rng.random_bool(0.5) {
        out.push_str(r#"<table id="x">"#);
    } else {
        out.push_str("<table>");
    }
    for _ in 0..rng.random_range(0..4) {
        out.push_str("<tr>");
        for _ in 0..rng.random_range(0..4) {
            out.push_str("<td>");
            random_cell(rng, out);
            out.push_str("</td>");
        }
        out.push_str("</tr>");
    }
    out.push_str("</table>");
}

fn random_block(rng: &mut StdRng, depth: usize, out: &mut String) {
    match rng.random_range(0..6) {
        0 if depth < 3 => {
            out.push_str("<div>");
            for _ in 0..rng.random_range(0..3) {
                random_block(rng, depth + 1, out);
            }
            out.push_str("</div>");
        }
        1 => {
            out.push_str("<h1>");
            random_phrase(rng, out);
            out.push_str("</h1>");
        }
        2 => random_table(rng, out),
        3 => {
            out.push_str("<p>");
            random_phrase(rng, out);
            out.push_str("</p>");
        }
        _ => random_phrase(rng, out),
    }
}

/// Documents over h1, b, td, div and tables (some with `id="x"`), whose
/// table cells each render to at most one line.
pub fn random_annotated_document(rng: &mut StdRng) -> String {
    let mut out = String::new();
    for _ in 0..rng.random_range(1..5) {
        random_block(rng, 0, &mut out);
    }
    out
}

/// Whether `element` matches one of the rule selectors used above.
pub fn selector_matches(selector: &str, element: &Element) -> bool {
    match selector.split_once('#') {
        None => element.tag == selector,
        Some((tag, cond)) => {
            let (attr, value) = cond.split_once('=').unwrap();
            element.tag == tag && element.attr(attr).is_some_and(|v| v.trim() == value)
        }
    }
}

/// Checks every span against the DOM: for each selector, the elements it
/// matches (in document order, skipping those without visible text) must
/// line up one-to-one with the spans carrying its label, and each span's
/// text must equal the element's text once all whitespace is removed.
pub fn check_annotation_text(tree: &ElementTree, doc: &RenderedDocument, selectors: &[&str]) -> Result<(), String> {
    check_annotations(&doc.text, &doc.annotations)?;
    for selector in selectors {
        let label = label_for(selector);
        let expected: Vec<String> = tree
            .root
            .descendants()
            .filter(|e| selector_matches(selector, e))
            .map(|e| strip_all_whitespace(&text_content(&Node::Element(e.clone()))))
            .filter(|t| !t.is_empty())
            .collect();
        let mut spans: Vec<&Annotation> = doc.annotations.iter().filter(|a| a.label == label).collect();
        spans.sort_by_key(|a| (a.start, std::cmp::Reverse(a.end)));
        let found: Vec<String> = spans
            .iter()
            .map(|a| strip_all_whitespace(&chars_between(&doc.text, a.start, a.end)))
            .collect();
        if expected != found {
            return Err(format!(
                "selector {selector}: expected {expected:?}, found {found:?}\ntext: {:?}",
                doc.text
            ));
        }
    }
    Ok(())
}

// ----------------------------------------------------- malformed corpus

/// Deterministic corpus of broken markup: truncated tags, misnested tables,
/// stray cell end tags, unclosed comments, bad entities and so on.
pub fn malformed_corpus(count: usize, seed: u64) -> Vec<String> {
    const FRAGMENTS: &[&str] = &[
        "<table>", "</table>", "<tr>", "</tr>", "<td>", "</td>", "<th>", "</th>", "<tbody>", "<thead>",
        "<caption>", "<p>", "</p>", "<div>", "</div>", "<b>", "</b>", "<i>", "</i>", "<ul>", "<li>", "</ul>",
        "<ol>", "</ol>", "<br>", "<br/>", "</br>", "<pre>", "</pre>", "<h1>", "</h2>", "<blockquote>",
        "<span style=\"display:none\">", "<span style=\"white-space:pre\">", "<td align=right>",
        "<td valign=bottom>", "<td align=\"center", "<!--", "-->", "<!doctype html>", "<?xml x?>",
        "<script>", "</script>", "<style>", "&amp", "&#", "&#x110000;", "&#0;", "&nosuch;", "&lt",
        "<", ">", "</", "< b>", "<a href='x", "\"", "'", "text", " ", "\n", "\t", "\u{0}", "\u{b}",
        "\u{feff}", "ü", "中文", "<img alt=\"pic\">", "<img alt=>", "<select><option>x", "<textarea>",
        "</textarea>", "<title>", "<html>", "<body>", "</body>", "<head>", "<frameset>", "<table><td>",
        "</td></td></tr>", "<tr><tr>", "<table><table>", "</table></table>", "<li><li>", "<p><p>",
        "<div style=\"margin-top: 3em\">", "<div style=\"margin-bottom:-2em\">", "<hr>", "<input>",
    ];
    let mut rng = rng(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(1..60);
            let mut doc: String = (0..n).map(|_| *FRAGMENTS.choose(&mut rng).unwrap()).collect();
            if i % 7 == 0 {
                let cut = rng.random_range(0..=doc.len());
                let mut cut = cut;
                while !doc.is_char_boundary(cut) {
                    cut -= 1;
                }
                doc.truncate(cut);
            }
            if i % 11 == 0 {
                doc = "<div>".repeat(600) + &doc;
            }
            doc
        })
        .collect()
}

/// Parses exported surface HTML and returns the text of its `<pre>` block
/// and the number of `span` elements inside it.
pub fn surface_html_contents(page: &str) -> Option<(String, usize)> {
    let tree = htmlflow::parse_str(page);
    let pre = tree.root.descendants().find(|e| e.tag == "pre")?;
    let spans = pre.descendants().filter(|e| e.tag == "span").count();
    Some((pre.text_content(), spans))
}
