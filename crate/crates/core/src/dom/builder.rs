use std::collections::HashMap;

use super::tokenizer::{Token, Tokenizer};
use super::{is_void, Element, ElementTree, Node, ROOT_TAG};

/// Deeper start tags yield empty elements; their content goes to the
/// innermost open element.
const MAX_DEPTH: usize = 256;

/// Start tags that implicitly close an open `p`.
const CLOSES_P: &[&str] = &[
    "address", "article", "aside", "blockquote", "center", "details", "dialog", "dir", "div", "dl",
    "dd", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
    "h6", "header", "hgroup", "hr", "li", "listing", "main", "menu", "nav", "ol", "p", "plaintext",
    "pre", "section", "summary", "table", "ul", "xmp",
];

const HEADINGS: &[&str] = &["h1", "h2", "h3", "h4", "h5", "h6"];
const TABLE_SECTIONS: &[&str] = &["thead", "tbody", "tfoot"];
const TABLE_INTERNAL: &[&str] = &["tr", "td", "th", "thead", "tbody", "tfoot", "caption"];
const HEAD_CONTENT: &[&str] = &[
    "title", "meta", "link", "style", "script", "base", "noscript", "template",
];

pub(super) fn build(input: &str) -> ElementTree {
    let normalized;
    let input = if input.contains('\r') {
        normalized = input.replace("\r\n", "\n").replace('\r', "\n");
        normalized.as_str()
    } else {
        input
    };
    let mut builder = TreeBuilder::new();
    for token in Tokenizer::new(input) {
        builder.process(token);
    }
    builder.finish()
}

struct TreeBuilder {
    /// Open elements; index 0 is the document root.
    stack: Vec<Element>,
    /// Start tags ignored past [`MAX_DEPTH`], so their end tags can be too.
    suppressed: HashMap<String, usize>,
    /// Drop one leading newline from the next text token (`pre` and friends).
    skip_newline: bool,
}

impl TreeBuilder {
    fn new() -> Self {
        TreeBuilder {
            stack: vec![Element::new(ROOT_TAG)],
            suppressed: HashMap::new(),
            skip_newline: false,
        }
    }

    fn current(&mut self) -> &mut Element {
        self.stack.last_mut().expect("root is never popped")
    }

    fn pop(&mut self) {
        if self.stack.len() > 1 {
            let done = self.stack.pop().expect("checked length");
            self.current().children.push(Node::Element(done));
        }
    }

    /// Pops until the element at `index` has been closed.
    fn pop_through(&mut self, index: usize) {
        while self.stack.len() > index.max(1) {
            self.pop();
        }
    }

    /// Searches open elements from the top for `target`, giving up at the
    /// first element in `boundary`.
    fn find(&self, target: &[&str], boundary: &[&str]) -> Option<usize> {
        for (i, e) in self.stack.iter().enumerate().rev() {
            if target.contains(&e.tag.as_str()) {
                return Some(i);
            }
            if boundary.contains(&e.tag.as_str()) {
                return None;
            }
        }
        None
    }

    fn is_open(&self, tag: &str) -> bool {
        self.stack.iter().any(|e| e.tag == tag)
    }

    fn process(&mut self, token: Token) {
        let skip_newline = std::mem::take(&mut self.skip_newline);
        match token {
            Token::Text(mut text) => {
                if skip_newline && text.starts_with('\n') {
                    text.remove(0);
                }
                if text.is_empty() {
                    return;
                }
                if self.is_open("head")
                    && !text.chars().all(|c| c.is_ascii_whitespace())
                    && !matches!(self.current().tag.as_str(), "title" | "style" | "script" | "noscript" | "template")
                {
                    self.close_head();
                }
                self.insert_text(text);
            }
            Token::StartTag {
                name,
                attrs,
                self_closing: _,
            } => self.start_tag(name, attrs),
            Token::EndTag { name } => self.end_tag(&name),
        }
    }

    fn insert_text(&mut self, text: String) {
        let current = self.current();
        if let Some(Node::Text(prev)) = current.children.last_mut() {
            prev.push_str(&text);
        } else {
            current.children.push(Node::Text(text));
        }
    }

    fn close_head(&mut self) {
        if let Some(i) = self.find(&["head"], &[]) {
            self.pop_through(i);
        }
    }

    fn start_tag(&mut self, name: String, attrs: Vec<(String, String)>) {
        let tag = name.as_str();
        if matches!(tag, "html" | "body" | "head") && self.is_open(tag) {
            return;
        }
        if self.is_open("head") && !HEAD_CONTENT.contains(&tag) {
            self.close_head();
        }
        self.close_implied(tag);

        let too_deep = self.stack.len() > MAX_DEPTH && !is_void(tag);
        if too_deep {
            *self.suppressed.entry(name.clone()).or_default() += 1;
        }

        let mut element = Element::new(name);
        for (n, v) in attrs {
            element.push_attr(n, v);
        }
        if too_deep || is_void(&element.tag) {
            self.current().children.push(Node::Element(element));
        } else {
            self.skip_newline = matches!(element.tag.as_str(), "pre" | "listing" | "textarea");
            self.stack.push(element);
        }
    }

    /// Closes whatever the incoming start tag implicitly ends.
    fn close_implied(&mut self, tag: &str) {
        if CLOSES_P.contains(&tag) {
            if let Some(i) = self.find(&["p"], &["table", "td", "th", "caption", "button"]) {
                self.pop_through(i);
            }
        }
        match tag {
            "li" => {
                if let Some(i) = self.find(&["li"], &["ul", "ol", "menu", "table", "td", "th"]) {
                    self.pop_through(i);
                }
            }
            "dd" | "dt" => {
                if let Some(i) = self.find(&["dd", "dt"], &["dl", "table", "td", "th"]) {
                    self.pop_through(i);
                }
            }
            _ if HEADINGS.contains(&tag) => {
                if HEADINGS.contains(&self.current().tag.as_str()) {
                    self.pop();
                }
            }
            "td" | "th" => {
                if let Some(i) = self.find(&["td", "th"], &["tr", "table"]) {
                    self.pop_through(i);
                }
                self.ensure_row();
            }
            "tr" => {
                if let Some(i) = self.find(&["tr"], &["table"]) {
                    self.pop_through(i);
                }
                self.pop_to_table_body();
            }
            "thead" | "tbody" | "tfoot" | "caption" => {
                if let Some(i) = self.find(&["table"], &[]) {
                    self.pop_through(i + 1);
                }
            }
            "table" => {
                // A table directly inside another table's structure (not in a
                // cell) ends the outer table.
                if let Some(i) = self.find(&["table"], &["td", "th", "caption"]) {
                    self.pop_through(i);
                }
            }
            _ => {}
        }
    }

    /// Inside a table, pops to the table or its open section.
    fn pop_to_table_body(&mut self) {
        if let Some(i) = self.find(&["table"], &["td", "th", "caption"]) {
            let keep = match self.stack.get(i + 1) {
                Some(e) if TABLE_SECTIONS.contains(&e.tag.as_str()) => i + 2,
                _ => i + 1,
            };
            self.pop_through(keep);
        }
    }

    /// Makes sure a cell about to open inside a table has a row to live in.
    fn ensure_row(&mut self) {
        match self.find(&["tr", "table"], &["td", "th", "caption"]) {
            Some(i) if self.stack[i].tag == "tr" => self.pop_through(i + 1),
            Some(_) => {
                self.pop_to_table_body();
                self.stack.push(Element::new("tr"));
            }
            None => {}
        }
    }

    fn end_tag(&mut self, tag: &str) {
        if let Some(n) = self.suppressed.get_mut(tag) {
            if *n > 0 {
                *n -= 1;
                return;
            }
        }
        let found = match tag {
            "html" | "body" => None,
            "table" => self.find(&["table"], &[]),
            _ if TABLE_INTERNAL.contains(&tag) => self.find(&[tag], &["table"]),
            _ => self.find(&[tag], &["table", "td", "th", "caption"]),
        };
        if let Some(i) = found {
            self.pop_through(i);
        }
    }

    fn finish(mut self) -> ElementTree {
        self.pop_through(1);
        ElementTree {
            root: self.stack.pop().expect("root"),
        }
    }
}
