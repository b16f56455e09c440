//! Depth-first rendering of an [`ElementTree`] onto a [`Canvas`].

mod canvas;

pub use canvas::{collapse_whitespace, is_collapsible, Canvas, CharClass, SpanId};

use serde::Serialize;

use crate::annotate::{self, Annotation, CompiledRules};
use crate::dom::{Element, ElementTree, Node};
use crate::parallel::Execution;
use crate::style::{resolve_style_at, ComputedStyle, Display, StyleProfile, WhiteSpace};
use crate::tables;

/// Output text plus annotations sorted by (start asc, end desc, label).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RenderedDocument {
    pub text: String,
    pub annotations: Vec<Annotation>,
}

/// Renders `tree` using the default execution mode.
pub fn render(tree: &ElementTree, profile: &StyleProfile, rules: &CompiledRules) -> RenderedDocument {
    Renderer::new(profile, rules).render(tree)
}

/// Shared, read-only rendering context.
#[derive(Debug, Clone, Copy)]
pub struct Renderer<'a> {
    pub(crate) profile: &'a StyleProfile,
    pub(crate) rules: &'a CompiledRules,
    pub(crate) execution: Execution,
}

impl<'a> Renderer<'a> {
    pub fn new(profile: &'a StyleProfile, rules: &'a CompiledRules) -> Self {
        Renderer {
            profile,
            rules,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn render(&self, tree: &ElementTree) -> RenderedDocument {
        let mut canvas = Canvas::new();
        self.render_children(&mut canvas, &tree.root, &ComputedStyle::root());
        canvas.finish()
    }

    pub(crate) fn render_children(&self, canvas: &mut Canvas, element: &Element, style: &ComputedStyle) {
        let mut ordinal = 0;
        for child in &element.children {
            if let Node::Element(e) = child {
                if e.tag == "li" {
                    ordinal += 1;
                }
            }
            self.render_node(canvas, child, style, ordinal.max(1));
        }
    }

    pub(crate) fn render_node(&self, canvas: &mut Canvas, node: &Node, parent: &ComputedStyle, ordinal: usize) {
        match node {
            Node::Text(text) => canvas.write_text(text, parent.whitespace),
            Node::Element(e) => self.render_element(canvas, e, parent, ordinal),
        }
    }

    pub(crate) fn render_element(&self, canvas: &mut Canvas, element: &Element, parent: &ComputedStyle, ordinal: usize) {
        let style = resolve_style_at(element, parent, self.profile, ordinal);
        if style.display == Display::None {
            return;
        }
        let spans = annotate::on_enter(element, self.rules, canvas);
        match (element.tag.as_str(), style.display) {
            ("br", _) => canvas.line_break(),
            ("img", _) => {
                if let Some(alt) = element.attr("alt") {
                    canvas.write_text(alt, WhiteSpace::Normal);
                }
            }
            (_, Display::Table) => tables::render_table(self, canvas, element, &style),
            (_, Display::Block | Display::TableRow) => {
                canvas.open_block(&style);
                self.render_children(canvas, element, &style);
                canvas.close_block(&style);
            }
            _ => self.render_children(canvas, element, &style),
        }
        annotate::on_exit(canvas, spans);
    }
}
