//! Annotation rules and labeled spans.
//!
//! Rules map selectors to labels. Two selector forms are supported: `tag`
//! matches every element with that tag name, and `tag#attr=value` matches
//! elements whose `attr` equals `value` exactly (both sides trimmed).

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::dom::Element;
use crate::flow::{Canvas, SpanId};

/// A labeled half-open character span `[start, end)` over the output text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Annotation {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl Annotation {
    pub fn new(start: usize, end: usize, label: impl Into<String>) -> Self {
        Annotation {
            start,
            end,
            label: label.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("malformed rule file at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("rule file must be a JSON object mapping selectors to label lists")]
    NotAnObject,
    #[error("invalid selector {selector:?}: {reason}")]
    Selector { selector: String, reason: &'static str },
    #[error("invalid labels for selector {selector:?}: {reason}")]
    Labels { selector: String, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Rule {
    condition: Option<(String, String)>,
    labels: Vec<String>,
}

/// Rules grouped by tag name for constant-time lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompiledRules {
    by_tag: HashMap<String, Vec<Rule>>,
}

impl CompiledRules {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.by_tag.is_empty()
    }

    /// Parses and validates a rule file, e.g. `{"h1": ["heading"]}`.
    pub fn from_json(source: &str) -> Result<Self, RuleError> {
        let value: serde_json::Value = serde_json::from_str(source).map_err(|e| RuleError::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Self::from_value(&value)
    }

    /// Same as [`CompiledRules::from_json`] for an already-parsed value.
    pub fn from_value(value: &serde_json::Value) -> Result<Self, RuleError> {
        let object = value.as_object().ok_or(RuleError::NotAnObject)?;
        let mut rules = CompiledRules::default();
        for (selector, labels) in object {
            let (tag, condition) = parse_selector(selector)?;
            let labels = parse_labels(selector, labels)?;
            rules
                .by_tag
                .entry(tag)
                .or_default()
                .push(Rule { condition, labels });
        }
        Ok(rules)
    }

    /// All labels of all rules matching `element`, in rule order.
    pub fn labels_for<'a>(&'a self, element: &'a Element) -> impl Iterator<Item = &'a str> + 'a {
        self.by_tag
            .get(&element.tag)
            .into_iter()
            .flatten()
            .filter(|rule| match &rule.condition {
                None => true,
                Some((attr, value)) => element.attr(attr).is_some_and(|v| v.trim() == value),
            })
            .flat_map(|rule| rule.labels.iter().map(String::as_str))
    }
}

/// Compiles a rule file. See [`CompiledRules::from_json`].
pub fn compile_rules(source: &str) -> Result<CompiledRules, RuleError> {
    CompiledRules::from_json(source)
}

fn parse_selector(selector: &str) -> Result<(String, Option<(String, String)>), RuleError> {
    let err = |reason| RuleError::Selector {
        selector: selector.to_string(),
        reason,
    };
    let (tag, condition) = match selector.split_once('#') {
        None => (selector.trim(), None),
        Some((tag, cond)) => {
            let (attr, value) = cond.split_once('=').ok_or_else(|| err("expected tag#attr=value"))?;
            let attr = attr.trim();
            if attr.is_empty() || attr.chars().any(|c| c.is_whitespace() || c == '=') {
                return Err(err("attribute name is empty or contains whitespace"));
            }
            (tag.trim(), Some((attr.to_ascii_lowercase(), value.trim().to_string())))
        }
    };
    if tag.is_empty() {
        return Err(err("tag name is empty"));
    }
    if !tag.bytes().all(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b':' | b'.')) {
        return Err(err("tag name contains invalid characters"));
    }
    Ok((tag.to_ascii_lowercase(), condition))
}

fn parse_labels(selector: &str, value: &serde_json::Value) -> Result<Vec<String>, RuleError> {
    let err = |reason| RuleError::Labels {
        selector: selector.to_string(),
        reason,
    };
    let list = value.as_array().ok_or_else(|| err("expected a list of labels"))?;
    if list.is_empty() {
        return Err(err("label list is empty"));
    }
    list.iter()
        .map(|label| match label.as_str() {
            None => Err(err("labels must be strings")),
            Some("") => Err(err("labels must be non-empty")),
            Some(l) if l.contains(['\n', '\r']) => Err(err("labels must not contain newlines")),
            Some(l) => Ok(l.to_string()),
        })
        .collect()
}

/// Opens one span per label matching `element`. The spans start at the
/// next glyph written to `canvas`.
pub fn on_enter(element: &Element, rules: &CompiledRules, canvas: &mut Canvas) -> Vec<SpanId> {
    if rules.is_empty() {
        return Vec::new();
    }
    rules.labels_for(element).map(|label| canvas.open_span(label)).collect()
}

/// Closes the spans opened by [`on_enter`] after the last glyph written.
pub fn on_exit(canvas: &mut Canvas, spans: Vec<SpanId>) {
    for id in spans.into_iter().rev() {
        canvas.close_span(id);
    }
}

/// Sorts by start ascending, end descending, then label. Stable.
pub fn sort_annotations(annotations: &mut [Annotation]) {
    annotations.sort_by(|a, b| {
        a.start
            .cmp(&b.start)
            .then(b.end.cmp(&a.end))
            .then_with(|| a.label.cmp(&b.label))
    });
}
