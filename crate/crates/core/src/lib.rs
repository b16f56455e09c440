//! Layout-aware HTML to plain text conversion.
//!
//! ```
//! let text = htmlflow::html_to_text("<h1>Title</h1><ul><li>one</li><li>two</li></ul>");
//! assert_eq!(text, "Title\n\n  * one\n  * two\n");
//! ```
//!
//! Tables are laid out as aligned monospace columns, and annotation rules
//! attach labels to the character ranges produced by matching elements:
//!
//! ```
//! use htmlflow::{CompiledRules, Converter};
//!
//! let rules = CompiledRules::from_json(r#"{"b": ["bold"]}"#).unwrap();
//! let doc = Converter::new().with_rules(rules).convert_str("<table><tr><td>a</td><td><b>bb</b></td></tr></table>");
//! assert_eq!(doc.text, "a  bb\n");
//! assert_eq!((doc.annotations[0].start, doc.annotations[0].end), (3, 5));
//! ```

pub mod annotate;
pub mod dom;
pub mod export;
pub mod flow;
pub mod parallel;
pub mod style;
pub mod tables;

pub use annotate::{compile_rules, Annotation, CompiledRules, RuleError};
pub use dom::{parse_html, parse_str, Element, ElementTree, Node};
pub use export::{export, ExportFormat, PostProcessor, Registry};
pub use flow::{render, RenderedDocument, Renderer};
pub use parallel::Execution;
pub use style::{ProfileError, StyleProfile};

/// A reusable conversion pipeline: style profile, annotation rules and
/// execution mode. Cheap to share across threads.
#[derive(Debug, Clone, Default)]
pub struct Converter {
    profile: StyleProfile,
    rules: CompiledRules,
    execution: Execution,
}

/// One input of a batch: raw bytes plus an optional encoding label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchInput {
    pub html: Vec<u8>,
    pub encoding_hint: Option<String>,
}

impl BatchInput {
    pub fn new(html: impl Into<Vec<u8>>) -> Self {
        BatchInput {
            html: html.into(),
            encoding_hint: None,
        }
    }
}

impl Converter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_profile(mut self, profile: StyleProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_rules(mut self, rules: CompiledRules) -> Self {
        self.rules = rules;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn profile(&self) -> &StyleProfile {
        &self.profile
    }

    pub fn rules(&self) -> &CompiledRules {
        &self.rules
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    fn renderer(&self) -> Renderer<'_> {
        Renderer::new(&self.profile, &self.rules).with_execution(self.execution)
    }

    pub fn render_tree(&self, tree: &ElementTree) -> RenderedDocument {
        self.renderer().render(tree)
    }

    /// Decodes `html` (BOM, then `encoding_hint`, then `<meta charset>`, then UTF-8) and renders it.
    pub fn convert(&self, html: &[u8], encoding_hint: Option<&str>) -> RenderedDocument {
        self.render_tree(&parse_html(html, encoding_hint))
    }

    pub fn convert_str(&self, html: &str) -> RenderedDocument {
        self.render_tree(&parse_str(html))
    }

    /// Converts and serializes in one step.
    pub fn convert_to(&self, html: &[u8], encoding_hint: Option<&str>, format: ExportFormat) -> String {
        export(&self.convert(html, encoding_hint), format)
    }

    /// Converts independent documents, in parallel unless the converter is
    /// sequential. Output order matches input order. Tables inside each
    /// document are rendered sequentially so the pool is not oversubscribed.
    pub fn convert_batch(&self, inputs: &[BatchInput]) -> Vec<RenderedDocument> {
        let inner = Renderer::new(&self.profile, &self.rules).with_execution(Execution::Sequential);
        self.execution.map(inputs, |input| {
            inner.render(&parse_html(&input.html, input.encoding_hint.as_deref()))
        })
    }
}

/// Converts an HTML string to plain text with the default profile.
pub fn html_to_text(html: &str) -> String {
    Converter::new().convert_str(html).text
}
