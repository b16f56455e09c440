use crate::annotate::{sort_annotations, Annotation};
use crate::style::{ComputedStyle, WhiteSpace};

use super::RenderedDocument;

const TAB_WIDTH: usize = 8;

/// Whitespace-collapse state: what the last emitted character was.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharClass {
    StartOfLine,
    Space,
    Glyph,
}

/// Characters collapsed in `white-space: normal`. U+00A0 is not among them.
pub fn is_collapsible(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r' | '\u{c}')
}

/// Replaces runs of collapsible whitespace with one space, dropping a
/// leading run when the previous character was already a space or the line
/// is empty.
pub fn collapse_whitespace(text: &str, state: CharClass) -> (String, CharClass) {
    let mut out = String::with_capacity(text.len());
    let mut state = state;
    for c in text.chars() {
        if is_collapsible(c) {
            if state == CharClass::Glyph {
                out.push(' ');
                state = CharClass::Space;
            }
        } else {
            out.push(c);
            state = CharClass::Glyph;
        }
    }
    (out, state)
}

#[derive(Debug)]
struct BlockFrame {
    padding: usize,
    bullet: Option<String>,
    bullet_pending: bool,
}

#[derive(Debug)]
struct OpenSpan {
    label: String,
    start: Option<usize>,
}

/// Handle returned by [`Canvas::open_span`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpanId(usize);

/// Accumulates rendered lines.
///
/// Offsets count characters (not bytes) of the final text, where every
/// completed line is followed by `\n`. Spaces are held back until a glyph
/// follows on the same line, so lines never end in spaces and every offset
/// handed out is final.
#[derive(Debug)]
pub struct Canvas {
    lines: Vec<String>,
    current: String,
    line_started: bool,
    /// Columns taken by the indentation prefix of the current line.
    prefix_width: usize,
    current_width: usize,
    pending_spaces: usize,
    pending_blank: usize,
    state: CharClass,
    offset: usize,
    frames: Vec<BlockFrame>,
    spans: Vec<OpenSpan>,
    unstarted: Vec<usize>,
    last_glyph_end: usize,
    annotations: Vec<Annotation>,
}

impl Default for Canvas {
    fn default() -> Self {
        Self::new()
    }
}

impl Canvas {
    pub fn new() -> Self {
        Canvas {
            lines: Vec::new(),
            current: String::new(),
            line_started: false,
            prefix_width: 0,
            current_width: 0,
            pending_spaces: 0,
            pending_blank: 0,
            state: CharClass::StartOfLine,
            offset: 0,
            frames: Vec::new(),
            spans: Vec::new(),
            unstarted: Vec::new(),
            last_glyph_end: 0,
            annotations: Vec::new(),
        }
    }

    pub fn state(&self) -> CharClass {
        self.state
    }

    pub fn pending_blank(&self) -> usize {
        self.pending_blank
    }

    /// Offset of the next character that would be written.
    pub fn offset(&self) -> usize {
        self.offset
    }

    fn start_line(&mut self) {
        if self.line_started {
            return;
        }
        // Margins are only realized between pieces of content.
        if !self.lines.is_empty() {
            for _ in 0..self.pending_blank {
                self.lines.push(String::new());
                self.offset += 1;
            }
        }
        self.pending_blank = 0;
        let mut width = 0;
        for frame in &mut self.frames {
            width += frame.padding;
            self.current.extend(std::iter::repeat_n(' ', frame.padding));
            if let Some(bullet) = &frame.bullet {
                let w = bullet.chars().count();
                if frame.bullet_pending {
                    self.current.push_str(bullet);
                    frame.bullet_pending = false;
                } else {
                    self.current.extend(std::iter::repeat_n(' ', w));
                }
                width += w;
            }
        }
        self.prefix_width = width;
        self.current_width = width;
        self.offset += width;
        self.line_started = true;
    }

    fn put_glyph(&mut self, c: char) {
        self.start_line();
        if self.pending_spaces > 0 {
            self.current.extend(std::iter::repeat_n(' ', self.pending_spaces));
            self.offset += self.pending_spaces;
            self.current_width += self.pending_spaces;
            self.pending_spaces = 0;
        }
        if !c.is_whitespace() {
            for id in self.unstarted.drain(..) {
                self.spans[id].start = Some(self.offset);
            }
            self.last_glyph_end = self.offset + 1;
        }
        self.current.push(c);
        self.offset += 1;
        self.current_width += 1;
        self.state = CharClass::Glyph;
    }

    /// Terminates the current line. An untouched line is only emitted (as an
    /// empty line) when `force` is set.
    fn end_line(&mut self, force: bool) {
        if self.line_started {
            self.lines.push(std::mem::take(&mut self.current));
            self.offset += 1;
        } else if force {
            if !self.lines.is_empty() {
                for _ in 0..self.pending_blank {
                    self.lines.push(String::new());
                    self.offset += 1;
                }
            }
            self.pending_blank = 0;
            self.lines.push(String::new());
            self.offset += 1;
        }
        self.line_started = false;
        self.pending_spaces = 0;
        self.current_width = 0;
        self.state = CharClass::StartOfLine;
    }

    pub fn write_text(&mut self, text: &str, whitespace: WhiteSpace) {
        match whitespace {
            WhiteSpace::Normal => {
                let (collapsed, state) = collapse_whitespace(text, self.state);
                for c in collapsed.chars() {
                    if c == ' ' {
                        self.pending_spaces = self.pending_spaces.max(1);
                    } else {
                        self.put_glyph(c);
                    }
                }
                self.state = state;
            }
            WhiteSpace::Pre => {
                for c in text.chars() {
                    match c {
                        '\n' => self.end_line(true),
                        ' ' | '\u{c}' | '\r' => {
                            self.pending_spaces += 1;
                            self.state = CharClass::Space;
                        }
                        '\t' => {
                            let column = if self.line_started {
                                self.current_width - self.prefix_width
                            } else {
                                0
                            } + self.pending_spaces;
                            self.pending_spaces += TAB_WIDTH - column % TAB_WIDTH;
                            self.state = CharClass::Space;
                        }
                        c => self.put_glyph(c),
                    }
                }
            }
        }
    }

    pub fn open_block(&mut self, style: &ComputedStyle) {
        self.end_line(false);
        self.pending_blank = self.pending_blank.max(style.margin_before);
        self.frames.push(BlockFrame {
            padding: style.padding_inline,
            bullet: style.list_bullet.clone(),
            bullet_pending: style.list_bullet.is_some(),
        });
    }

    pub fn close_block(&mut self, style: &ComputedStyle) {
        self.end_line(false);
        self.pending_blank = self.pending_blank.max(style.margin_after);
        self.frames.pop();
    }

    /// Ends the current line, emitting an empty line if nothing was written.
    pub fn line_break(&mut self) {
        self.end_line(true);
    }

    /// Writes a complete pre-formatted line on its own row, honoring the
    /// active indentation. Returns the offset of the line's first column, or
    /// `None` when the line is blank.
    pub fn emit_line(&mut self, line: &str) -> Option<usize> {
        self.end_line(false);
        let line = line.trim_end_matches(' ');
        if line.is_empty() {
            self.end_line(true);
            return None;
        }
        self.start_line();
        let base = self.offset;
        for c in line.chars() {
            if c == ' ' {
                self.pending_spaces += 1;
            } else {
                self.put_glyph(c);
            }
        }
        self.end_line(false);
        Some(base)
    }

    /// Starts a span at the next glyph written.
    pub fn open_span(&mut self, label: &str) -> SpanId {
        let id = self.spans.len();
        self.spans.push(OpenSpan {
            label: label.to_string(),
            start: None,
        });
        self.unstarted.push(id);
        SpanId(id)
    }

    /// Ends a span after the last glyph written. Spans that saw no glyph
    /// are dropped.
    pub fn close_span(&mut self, id: SpanId) {
        if let Some(pos) = self.unstarted.iter().rposition(|&u| u == id.0) {
            self.unstarted.remove(pos);
            return;
        }
        let span = &mut self.spans[id.0];
        if let Some(start) = span.start {
            let label = std::mem::take(&mut span.label);
            self.annotations.push(Annotation::new(start, self.last_glyph_end, label));
        }
    }

    /// Adds an annotation whose offsets were computed elsewhere.
    pub fn push_annotation(&mut self, annotation: Annotation) {
        self.annotations.push(annotation);
    }

    /// Completed lines (trailing blank lines removed, one kept if the
    /// canvas holds nothing else) and unsorted annotations.
    pub fn into_parts(mut self) -> (Vec<String>, Vec<Annotation>) {
        self.end_line(false);
        while self.lines.len() > 1 && self.lines.last().is_some_and(String::is_empty) {
            self.lines.pop();
        }
        (self.lines, self.annotations)
    }

    pub fn finish(self) -> RenderedDocument {
        let (lines, mut annotations) = self.into_parts();
        let mut text = lines.join("\n");
        if !lines.is_empty() {
            text.push('\n');
        }
        sort_annotations(&mut annotations);
        RenderedDocument { text, annotations }
    }
}
