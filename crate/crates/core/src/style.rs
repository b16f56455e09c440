//! Per-element rendering directives.
//!
//! A [`ComputedStyle`] is resolved from, in increasing precedence: inherited
//! values from the parent, the tag's entry in the [`StyleProfile`], the
//! `align`/`valign`/`hidden` HTML attributes, and the element's inline
//! `style` declarations.

use std::collections::HashMap;

use serde::Deserialize;
use thiserror::Error;

use crate::dom::Element;

/// Upper bound for margins and padding, in lines or columns.
pub const MAX_LENGTH: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Display {
    Block,
    Inline,
    None,
    Table,
    TableRow,
    TableCell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WhiteSpace {
    #[default]
    Normal,
    Pre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizontalAlign {
    #[default]
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerticalAlign {
    #[default]
    Top,
    Middle,
    Bottom,
}

/// Marker style a list container hands to its `li` children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ListKind {
    Unordered,
    Ordered,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComputedStyle {
    pub display: Display,
    pub whitespace: WhiteSpace,
    /// Blank lines required above the block.
    pub margin_before: usize,
    /// Blank lines required below the block.
    pub margin_after: usize,
    /// Columns of indentation applied to the element's content lines.
    pub padding_inline: usize,
    pub horizontal_align: HorizontalAlign,
    pub vertical_align: VerticalAlign,
    pub list_bullet: Option<String>,
    pub list_kind: Option<ListKind>,
}

impl ComputedStyle {
    /// Style of the synthetic document root.
    pub fn root() -> Self {
        ComputedStyle {
            display: Display::Block,
            whitespace: WhiteSpace::Normal,
            margin_before: 0,
            margin_after: 0,
            padding_inline: 0,
            horizontal_align: HorizontalAlign::Left,
            vertical_align: VerticalAlign::Top,
            list_bullet: None,
            list_kind: None,
        }
    }

    /// Initial values for a child: inherited fields copied, the rest reset.
    fn inherit_from(parent: &ComputedStyle) -> Self {
        ComputedStyle {
            display: Display::Inline,
            whitespace: parent.whitespace,
            horizontal_align: parent.horizontal_align,
            vertical_align: parent.vertical_align,
            ..ComputedStyle::root()
        }
    }

    pub fn is_block(&self) -> bool {
        matches!(self.display, Display::Block | Display::Table | Display::TableRow)
    }
}

/// A style fragment: only the fields that are set override.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PartialStyle {
    pub display: Option<Display>,
    pub whitespace: Option<WhiteSpace>,
    pub margin_before: Option<usize>,
    pub margin_after: Option<usize>,
    pub padding_inline: Option<usize>,
    pub horizontal_align: Option<HorizontalAlign>,
    pub vertical_align: Option<VerticalAlign>,
    pub list_bullet: Option<String>,
    pub list_kind: Option<ListKind>,
}

impl PartialStyle {
    fn display(display: Display) -> Self {
        PartialStyle {
            display: Some(display),
            ..Default::default()
        }
    }

    fn block(before: usize, after: usize) -> Self {
        PartialStyle {
            display: Some(Display::Block),
            margin_before: Some(before),
            margin_after: Some(after),
            ..Default::default()
        }
    }

    fn apply(&self, style: &mut ComputedStyle) {
        if let Some(v) = self.display {
            style.display = v;
        }
        if let Some(v) = self.whitespace {
            style.whitespace = v;
        }
        if let Some(v) = self.margin_before {
            style.margin_before = v.min(MAX_LENGTH);
        }
        if let Some(v) = self.margin_after {
            style.margin_after = v.min(MAX_LENGTH);
        }
        if let Some(v) = self.padding_inline {
            style.padding_inline = v.min(MAX_LENGTH);
        }
        if let Some(v) = self.horizontal_align {
            style.horizontal_align = v;
        }
        if let Some(v) = self.vertical_align {
            style.vertical_align = v;
        }
        if let Some(v) = &self.list_bullet {
            style.list_bullet = Some(v.replace('\n', " "));
        }
        if let Some(v) = self.list_kind {
            style.list_kind = Some(v);
        }
    }

    /// Overlays the fields set in `other`.
    fn merge(&mut self, other: PartialStyle) {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            display,
            whitespace,
            margin_before,
            margin_after,
            padding_inline,
            horizontal_align,
            vertical_align,
            list_bullet,
            list_kind
        );
    }
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("invalid style profile: {0}")]
    Json(#[from] serde_json::Error),
}

/// Tag-indexed default styles plus a fallback for unknown tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleProfile {
    defaults: HashMap<String, PartialStyle>,
    fallback: PartialStyle,
}

impl Default for StyleProfile {
    fn default() -> Self {
        let mut defaults = HashMap::new();
        let mut set = |tags: &[&str], style: PartialStyle| {
            for tag in tags {
                defaults.insert(tag.to_string(), style.clone());
            }
        };
        set(&["p", "h1", "h2", "h3", "h4", "h5", "h6", "figure"], PartialStyle::block(1, 1));
        set(
            &[
                "html", "body", "div", "section", "article", "header", "footer", "main", "aside",
                "nav", "li", "dl", "dt", "dd", "address", "form", "fieldset", "legend", "details",
                "summary", "figcaption", "hgroup", "hr", "caption", "center", "dialog",
                "thead", "tbody", "tfoot",
            ],
            PartialStyle::block(0, 0),
        );
        set(
            &["pre", "listing", "xmp", "plaintext"],
            PartialStyle {
                whitespace: Some(WhiteSpace::Pre),
                ..PartialStyle::block(1, 1)
            },
        );
        set(
            &["blockquote"],
            PartialStyle {
                padding_inline: Some(2),
                ..PartialStyle::block(1, 1)
            },
        );
        set(
            &["ul", "menu", "dir"],
            PartialStyle {
                padding_inline: Some(2),
                list_kind: Some(ListKind::Unordered),
                ..PartialStyle::block(0, 0)
            },
        );
        set(
            &["ol"],
            PartialStyle {
                padding_inline: Some(2),
                list_kind: Some(ListKind::Ordered),
                ..PartialStyle::block(0, 0)
            },
        );
        set(&["table"], PartialStyle::display(Display::Table));
        set(&["tr"], PartialStyle::display(Display::TableRow));
        set(&["td"], PartialStyle::display(Display::TableCell));
        set(
            &["th"],
            PartialStyle {
                horizontal_align: Some(HorizontalAlign::Center),
                ..PartialStyle::display(Display::TableCell)
            },
        );
        set(
            &["script", "style", "head", "meta", "link", "template", "title", "base"],
            PartialStyle::display(Display::None),
        );
        StyleProfile {
            defaults,
            fallback: PartialStyle::display(Display::Inline),
        }
    }
}

impl StyleProfile {
    /// Profile entry for `tag`, or the fallback.
    pub fn lookup(&self, tag: &str) -> &PartialStyle {
        self.defaults.get(tag).unwrap_or(&self.fallback)
    }

    /// Merges `style` into the entry for `tag` (`*` addresses the fallback).
    pub fn set(&mut self, tag: &str, style: PartialStyle) {
        let tag = tag.to_ascii_lowercase();
        let entry = if tag == "*" {
            &mut self.fallback
        } else {
            self.defaults.entry(tag).or_insert_with(|| self.fallback.clone())
        };
        entry.merge(style);
    }

    /// The default profile with overrides from a JSON object mapping tag
    /// names to partial styles, e.g. `{"p": {"margin-before": 2}}`.
    pub fn from_overrides_json(json: &str) -> Result<Self, ProfileError> {
        let mut profile = StyleProfile::default();
        profile.apply_overrides_json(json)?;
        Ok(profile)
    }

    pub fn apply_overrides_json(&mut self, json: &str) -> Result<(), ProfileError> {
        let overrides: HashMap<String, PartialStyle> = serde_json::from_str(json)?;
        for (tag, style) in overrides {
            self.set(&tag, style);
        }
        Ok(())
    }
}

/// Resolves the style of `element` given its parent's computed style.
pub fn resolve_style(element: &Element, parent: &ComputedStyle, profile: &StyleProfile) -> ComputedStyle {
    resolve_style_at(element, parent, profile, 1)
}

/// Like [`resolve_style`], with the 1-based position of `element` among its
/// `li` siblings for numbering ordered list items.
pub fn resolve_style_at(
    element: &Element,
    parent: &ComputedStyle,
    profile: &StyleProfile,
    ordinal: usize,
) -> ComputedStyle {
    let mut style = ComputedStyle::inherit_from(parent);
    profile.lookup(&element.tag).apply(&mut style);

    if element.tag == "li" && style.list_bullet.is_none() {
        style.list_bullet = Some(match parent.list_kind {
            Some(ListKind::Ordered) => format!("{ordinal}. "),
            _ => "* ".to_string(),
        });
    }

    if let Some(align) = element.attr("align").and_then(parse_horizontal_align) {
        style.horizontal_align = align;
    }
    if let Some(align) = element.attr("valign").and_then(parse_vertical_align) {
        style.vertical_align = align;
    }
    if element.has_attr("hidden") {
        style.display = Display::None;
    }

    if let Some(css) = element.attr("style") {
        for (property, value) in parse_inline_style(css) {
            apply_declaration(&mut style, &property, &value);
        }
    }
    style
}

const SUPPORTED_PROPERTIES: &[&str] = &[
    "display",
    "white-space",
    "margin-top",
    "margin-bottom",
    "padding-left",
    "vertical-align",
    "text-align",
];

/// Splits an inline `style` attribute into supported `(property, value)`
/// declarations. Names and values are lowercased; `!important` is dropped.
pub fn parse_inline_style(value: &str) -> Vec<(String, String)> {
    value
        .split(';')
        .filter_map(|decl| {
            let (prop, val) = decl.split_once(':')?;
            let prop = prop.trim_matches(|c: char| c.is_ascii_whitespace()).to_ascii_lowercase();
            if !SUPPORTED_PROPERTIES.contains(&prop.as_str()) {
                return None;
            }
            let mut val = val.trim_matches(|c: char| c.is_ascii_whitespace()).to_ascii_lowercase();
            if let Some(stripped) = val.strip_suffix("!important") {
                val = stripped.trim_end_matches(|c: char| c.is_ascii_whitespace()).to_string();
            }
            (!val.is_empty()).then_some((prop, val))
        })
        .collect()
}

fn apply_declaration(style: &mut ComputedStyle, property: &str, value: &str) {
    match property {
        "display" => {
            let display = match value {
                "block" | "list-item" | "flex" | "grid" | "flow-root" => Display::Block,
                "inline" | "inline-block" | "inline-flex" | "inline-grid" => Display::Inline,
                "none" => Display::None,
                "table" => Display::Table,
                "table-row" => Display::TableRow,
                "table-cell" => Display::TableCell,
                _ => return,
            };
            style.display = display;
        }
        "white-space" => match value {
            "normal" | "nowrap" => style.whitespace = WhiteSpace::Normal,
            "pre" | "pre-wrap" | "break-spaces" => style.whitespace = WhiteSpace::Pre,
            _ => {}
        },
        "margin-top" => style.margin_before = parse_length_lines(value),
        "margin-bottom" => style.margin_after = parse_length_lines(value),
        "padding-left" => style.padding_inline = parse_length_lines(value),
        "vertical-align" => {
            if let Some(v) = parse_vertical_align(value) {
                style.vertical_align = v;
            }
        }
        "text-align" => {
            if let Some(v) = parse_horizontal_align(value) {
                style.horizontal_align = v;
            }
        }
        _ => {}
    }
}

fn parse_horizontal_align(value: &str) -> Option<HorizontalAlign> {
    match value.trim().to_ascii_lowercase().as_str() {
        "left" | "start" => Some(HorizontalAlign::Left),
        "center" | "middle" => Some(HorizontalAlign::Center),
        "right" | "end" => Some(HorizontalAlign::Right),
        _ => None,
    }
}

fn parse_vertical_align(value: &str) -> Option<VerticalAlign> {
    match value.trim().to_ascii_lowercase().as_str() {
        "top" | "text-top" => Some(VerticalAlign::Top),
        "middle" | "center" => Some(VerticalAlign::Middle),
        "bottom" | "text-bottom" => Some(VerticalAlign::Bottom),
        _ => None,
    }
}

/// Converts a vertical length to whole lines: `<number>` or `<number>em`,
/// 1em being one line, rounded half-up and clamped to `0..=MAX_LENGTH`.
/// Anything else is 0.
pub fn parse_length_lines(value: &str) -> usize {
    let value = value.trim();
    let number = value.strip_suffix("em").unwrap_or(value);
    let digits = number.strip_prefix(['+', '-']).unwrap_or(number);
    let valid = !digits.is_empty()
        && digits.chars().all(|c| c.is_ascii_digit() || c == '.')
        && digits.chars().filter(|&c| c == '.').count() <= 1
        && digits != ".";
    if !valid {
        return 0;
    }
    match number.parse::<f64>() {
        Ok(n) if n > 0.0 => ((n + 0.5).floor() as usize).min(MAX_LENGTH),
        _ => 0,
    }
}
