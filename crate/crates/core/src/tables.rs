//! Monospace table layout.
//!
//! Every cell is rendered on its own canvas (nested tables included), then
//! cells are padded to their column width and row height and joined with a
//! two-space separator. Cell-local annotations are moved to document offsets
//! afterwards, one fragment per line.

use crate::annotate::{self, Annotation, CompiledRules};
use crate::dom::{Element, Node};
use crate::flow::{Canvas, Renderer};
use crate::style::{resolve_style, ComputedStyle, Display, HorizontalAlign, StyleProfile, VerticalAlign};

pub const COLUMN_SEPARATOR: &str = "  ";

/// Below this many cells a table is rendered sequentially.
const PARALLEL_CELL_THRESHOLD: usize = 32;

/// A fully rendered table cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRender {
    pub lines: Vec<String>,
    /// Offsets into `lines.join("\n")`.
    pub annotations: Vec<Annotation>,
    pub style: ComputedStyle,
}

impl CellRender {
    pub fn from_lines(lines: &[&str], style: ComputedStyle) -> Self {
        CellRender {
            lines: lines.iter().map(|l| l.to_string()).collect(),
            annotations: Vec::new(),
            style,
        }
    }

    pub fn width(&self) -> usize {
        self.lines.iter().map(|l| l.chars().count()).max().unwrap_or(0)
    }

    pub fn height(&self) -> usize {
        self.lines.len()
    }
}

/// One line-local piece of a cell annotation, in cell coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSpan {
    pub line: usize,
    pub start_col: usize,
    pub end_col: usize,
    pub label: String,
}

/// Where a cell ended up in the table's lines.
#[derive(Debug, Clone, PartialEq, Eq)]
struct CellPlacement {
    /// Table line holding the cell's first line.
    first_line: usize,
    /// Table column at which each cell line starts.
    line_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableLayout {
    pub column_widths: Vec<usize>,
    pub row_heights: Vec<usize>,
    /// Start column of each column's content region.
    pub column_starts: Vec<usize>,
    /// Assembled lines, trailing spaces removed.
    pub lines: Vec<String>,
    placements: Vec<Vec<CellPlacement>>,
}

impl TableLayout {
    /// Maps a cell-local position to a (table line, table column) pair.
    pub fn place(&self, row: usize, column: usize, cell_line: usize, cell_column: usize) -> Option<(usize, usize)> {
        let p = self.placements.get(row)?.get(column)?;
        let start = p.line_columns.get(cell_line)?;
        Some((p.first_line + cell_line, start + cell_column))
    }
}

/// Column count is the longest row; missing cells have width 0.
pub fn compute_column_widths(cells: &[Vec<CellRender>]) -> Vec<usize> {
    let columns = cells.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; columns];
    for row in cells {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.width());
        }
    }
    widths
}

pub fn layout_table(cells: &[Vec<CellRender>]) -> TableLayout {
    let column_widths = compute_column_widths(cells);
    let mut column_starts = Vec::with_capacity(column_widths.len());
    let mut x = 0;
    for w in &column_widths {
        column_starts.push(x);
        x += w + COLUMN_SEPARATOR.len();
    }
    let row_heights: Vec<usize> = cells
        .iter()
        .map(|row| row.iter().map(CellRender::height).max().unwrap_or(0))
        .collect();

    let mut lines = Vec::new();
    let mut placements = Vec::with_capacity(cells.len());
    for (row, &height) in cells.iter().zip(&row_heights) {
        let first = lines.len();
        let mut row_lines = vec![String::new(); height];
        let mut row_placements = Vec::with_capacity(row.len());
        for (c, &width) in column_widths.iter().enumerate() {
            let cell = row.get(c);
            let cell_height = cell.map_or(0, CellRender::height);
            let top = match cell.map(|cell| cell.style.vertical_align) {
                Some(VerticalAlign::Bottom) => height - cell_height,
                Some(VerticalAlign::Middle) => (height - cell_height) / 2,
                _ => 0,
            };
            let mut line_columns = Vec::with_capacity(cell_height);
            for (i, out) in row_lines.iter_mut().enumerate() {
                if c > 0 {
                    out.push_str(COLUMN_SEPARATOR);
                }
                let content = match cell {
                    Some(cell) if i >= top && i < top + cell_height => cell.lines[i - top].as_str(),
                    _ => "",
                };
                let len = content.chars().count();
                let left = match cell.map(|cell| cell.style.horizontal_align) {
                    Some(HorizontalAlign::Right) => width - len,
                    Some(HorizontalAlign::Center) => (width - len) / 2,
                    _ => 0,
                };
                if i >= top && i < top + cell_height {
                    line_columns.push(column_starts[c] + left);
                }
                out.extend(std::iter::repeat_n(' ', left));
                out.push_str(content);
                out.extend(std::iter::repeat_n(' ', width - len - left));
            }
            if c < row.len() {
                row_placements.push(CellPlacement {
                    first_line: first + top,
                    line_columns,
                });
            }
        }
        for mut line in row_lines {
            line.truncate(line.trim_end_matches(' ').len());
            lines.push(line);
        }
        placements.push(row_placements);
    }
    TableLayout {
        column_widths,
        row_heights,
        column_starts,
        lines,
        placements,
    }
}

/// Splits cell annotations at line boundaries and trims each piece to its
/// non-whitespace extent. Empty pieces are dropped.
pub fn split_cell_annotations(cell: &CellRender) -> Vec<LineSpan> {
    if cell.annotations.is_empty() {
        return Vec::new();
    }
    let lines: Vec<Vec<char>> = cell.lines.iter().map(|l| l.chars().collect()).collect();
    let mut starts = Vec::with_capacity(lines.len());
    let mut offset = 0;
    for line in &lines {
        starts.push(offset);
        offset += line.len() + 1;
    }
    let mut out = Vec::new();
    for a in &cell.annotations {
        for (i, line) in lines.iter().enumerate() {
            let line_start = starts[i];
            let line_end = line_start + line.len();
            if a.end <= line_start || a.start >= line_end {
                continue;
            }
            let mut s = a.start.max(line_start) - line_start;
            let mut e = a.end.min(line_end) - line_start;
            while s < e && line[s].is_whitespace() {
                s += 1;
            }
            while e > s && line[e - 1].is_whitespace() {
                e -= 1;
            }
            if s < e {
                out.push(LineSpan {
                    line: i,
                    start_col: s,
                    end_col: e,
                    label: a.label.clone(),
                });
            }
        }
    }
    out
}

/// Moves cell annotations to document offsets. `line_offsets[i]` is the
/// offset of table line `i`'s first column, `None` for blank lines.
pub fn remap_annotations(
    cells: &[Vec<CellRender>],
    layout: &TableLayout,
    line_offsets: &[Option<usize>],
) -> Vec<Annotation> {
    let mut out = Vec::new();
    for (r, row) in cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            for span in split_cell_annotations(cell) {
                let Some((line, column)) = layout.place(r, c, span.line, span.start_col) else {
                    continue;
                };
                let Some(Some(base)) = line_offsets.get(line) else {
                    continue;
                };
                let start = base + column;
                out.push(Annotation::new(start, start + span.end_col - span.start_col, span.label));
            }
        }
    }
    out
}

struct Row<'t> {
    element: &'t Element,
    group: Option<&'t Element>,
    cells: Vec<(&'t Element, ComputedStyle)>,
}

#[derive(Default)]
struct TableParts<'t> {
    captions: Vec<&'t Element>,
    rows: Vec<Row<'t>>,
    /// Content that is not part of the table grid; rendered before it.
    strays: Vec<(&'t Node, ComputedStyle)>,
}

fn is_blank(node: &Node) -> bool {
    matches!(node, Node::Text(t) if t.chars().all(|c| c.is_ascii_whitespace()))
}

fn collect_parts<'t>(table: &'t Element, style: &ComputedStyle, profile: &StyleProfile) -> TableParts<'t> {
    let mut parts = TableParts::default();
    let add_row = |parts: &mut TableParts<'t>, tr: &'t Element, row_style: ComputedStyle, group| {
        let mut cells = Vec::new();
        for node in &tr.children {
            match node {
                Node::Element(td) => {
                    let cell_style = resolve_style(td, &row_style, profile);
                    match cell_style.display {
                        Display::None => {}
                        Display::TableCell => cells.push((td, cell_style)),
                        _ => parts.strays.push((node, row_style.clone())),
                    }
                }
                _ if is_blank(node) => {}
                _ => parts.strays.push((node, row_style.clone())),
            }
        }
        parts.rows.push(Row {
            element: tr,
            group,
            cells,
        });
    };

    for node in &table.children {
        let Node::Element(child) = node else {
            if !is_blank(node) {
                parts.strays.push((node, style.clone()));
            }
            continue;
        };
        let child_style = resolve_style(child, style, profile);
        if child_style.display == Display::None {
            continue;
        }
        if child.tag == "caption" {
            parts.captions.push(child);
        } else if matches!(child.tag.as_str(), "thead" | "tbody" | "tfoot") {
            for inner in &child.children {
                match inner {
                    Node::Element(tr) => {
                        let row_style = resolve_style(tr, &child_style, profile);
                        match row_style.display {
                            Display::None => {}
                            Display::TableRow => add_row(&mut parts, tr, row_style, Some(child)),
                            _ => parts.strays.push((inner, child_style.clone())),
                        }
                    }
                    _ if is_blank(inner) => {}
                    _ => parts.strays.push((inner, child_style.clone())),
                }
            }
        } else if child_style.display == Display::TableRow {
            add_row(&mut parts, child, child_style, None);
        } else {
            parts.strays.push((node, style.clone()));
        }
    }
    parts
}

fn render_cell(renderer: &Renderer<'_>, cell: &Element, style: &ComputedStyle) -> CellRender {
    let mut canvas = Canvas::new();
    let spans = annotate::on_enter(cell, renderer.rules, &mut canvas);
    canvas.open_block(style);
    renderer.render_children(&mut canvas, cell, style);
    canvas.close_block(style);
    annotate::on_exit(&mut canvas, spans);
    let (lines, annotations) = canvas.into_parts();
    CellRender {
        lines,
        annotations,
        style: style.clone(),
    }
}

/// Lays out `table` as a block on `canvas`.
pub(crate) fn render_table(renderer: &Renderer<'_>, canvas: &mut Canvas, table: &Element, style: &ComputedStyle) {
    let parts = collect_parts(table, style, renderer.profile);
    canvas.open_block(style);

    for (node, parent_style) in &parts.strays {
        renderer.render_node(canvas, node, parent_style, 1);
    }
    for caption in &parts.captions {
        renderer.render_element(canvas, caption, style, 1);
    }

    let flat: Vec<(&Element, &ComputedStyle)> = parts
        .rows
        .iter()
        .flat_map(|row| row.cells.iter().map(|(e, s)| (*e, s)))
        .collect();
    let execution = if flat.len() >= PARALLEL_CELL_THRESHOLD {
        renderer.execution
    } else {
        crate::parallel::Execution::Sequential
    };
    let mut rendered = execution
        .map(&flat, |(cell, cell_style)| render_cell(renderer, cell, cell_style))
        .into_iter();
    let cells: Vec<Vec<CellRender>> = parts
        .rows
        .iter()
        .map(|row| rendered.by_ref().take(row.cells.len()).collect())
        .collect();

    let layout = layout_table(&cells);
    let mut offsets = Vec::with_capacity(layout.lines.len());
    let mut lines = layout.lines.iter();
    let mut group: Option<(&Element, Vec<_>)> = None;
    for (row, &height) in parts.rows.iter().zip(&layout.row_heights) {
        let same_group = match (&group, row.group) {
            (Some((g, _)), Some(r)) => std::ptr::eq(*g, r),
            (None, None) => true,
            _ => false,
        };
        if !same_group {
            if let Some((_, spans)) = group.take() {
                annotate::on_exit(canvas, spans);
            }
            if let Some(g) = row.group {
                group = Some((g, annotate::on_enter(g, renderer.rules, canvas)));
            }
        }
        let spans = annotate::on_enter(row.element, renderer.rules, canvas);
        for line in lines.by_ref().take(height) {
            offsets.push(canvas.emit_line(line));
        }
        annotate::on_exit(canvas, spans);
    }
    if let Some((_, spans)) = group.take() {
        annotate::on_exit(canvas, spans);
    }

    for annotation in remap_annotations(&cells, &layout, &offsets) {
        canvas.push_annotation(annotation);
    }
    canvas.close_block(style);
}

/// Renders a standalone table element, returning its lines and annotations
/// (offsets into `lines.join("\n")`).
pub fn render_table_lines(table: &Element, profile: &StyleProfile, rules: &CompiledRules) -> (Vec<String>, Vec<Annotation>) {
    let renderer = Renderer::new(profile, rules);
    let mut canvas = Canvas::new();
    let style = resolve_style(table, &ComputedStyle::root(), profile);
    if style.display != Display::None {
        let spans = annotate::on_enter(table, rules, &mut canvas);
        render_table(&renderer, &mut canvas, table, &style);
        annotate::on_exit(&mut canvas, spans);
    }
    let (lines, mut annotations) = canvas.into_parts();
    annotate::sort_annotations(&mut annotations);
    (lines, annotations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::parse_str;
    use crate::style::StyleProfile;

    fn cell(lines: &[&str]) -> CellRender {
        CellRender::from_lines(lines, ComputedStyle::root())
    }

    fn aligned(lines: &[&str], h: HorizontalAlign, v: VerticalAlign) -> CellRender {
        let style = ComputedStyle {
            horizontal_align: h,
            vertical_align: v,
            ..ComputedStyle::root()
        };
        CellRender::from_lines(lines, style)
    }

    fn table_lines(html: &str) -> Vec<String> {
        let tree = parse_str(html);
        let table = tree.root.elements().next().unwrap();
        render_table_lines(table, &StyleProfile::default(), &CompiledRules::empty()).0
    }

    #[test]
    fn two_by_two() {
        assert_eq!(
            table_lines("<table><tr><td>a</td><td>bb</td></tr><tr><td>ccc</td><td>d</td></tr></table>"),
            ["a    bb", "ccc  d"]
        );
    }

    #[test]
    fn single_cell() {
        assert_eq!(table_lines("<table><tr><td>x</td></tr></table>"), ["x"]);
    }

    #[test]
    fn right_aligned_cell() {
        assert_eq!(
            table_lines(r#"<table><tr><td align="right">x</td></tr><tr><td>abc</td></tr></table>"#),
            ["  x", "abc"]
        );
    }

    #[test]
    fn empty_tables() {
        assert!(table_lines("<table></table>").is_empty());
        assert!(table_lines("<table><tr></tr></table>").is_empty());
    }

    #[test]
    fn column_widths() {
        assert_eq!(compute_column_widths(&[vec![cell(&["a"]), cell(&["bb"])], vec![cell(&["ccc"]), cell(&["d"])]]), [3, 2]);
        assert_eq!(compute_column_widths(&[vec![cell(&[])]]), [0]);
        assert_eq!(compute_column_widths(&[vec![cell(&["aa"])], vec![cell(&["b"]), cell(&["cc"])]]), [2, 2]);
    }

    #[test]
    fn vertical_and_horizontal_alignment() {
        let cells = vec![vec![
            cell(&["1", "2", "3", "4"]),
            aligned(&["b"], HorizontalAlign::Left, VerticalAlign::Bottom),
            aligned(&["m"], HorizontalAlign::Left, VerticalAlign::Middle),
            aligned(&["c", "cc"], HorizontalAlign::Center, VerticalAlign::Middle),
        ]];
        let layout = layout_table(&cells);
        assert_eq!(layout.row_heights, [4]);
        assert_eq!(layout.lines, ["1", "2     m  c", "3        cc", "4  b"].map(String::from));
    }

    #[test]
    fn placement_of_cell_positions() {
        let cells = vec![
            vec![cell(&["a"]), aligned(&["xy"], HorizontalAlign::Right, VerticalAlign::Top)],
            vec![cell(&["bbbb"]), cell(&["z", "zzz"])],
        ];
        let layout = layout_table(&cells);
        assert_eq!(layout.column_starts, [0, 6]);
        assert_eq!(layout.place(0, 1, 0, 0), Some((0, 7)));
        assert_eq!(layout.place(1, 1, 1, 2), Some((2, 8)));
        assert_eq!(layout.place(1, 1, 2, 0), None);
    }

    #[test]
    fn remap_offsets_and_split() {
        let mut c = cell(&["ab", " cd"]);
        c.annotations = vec![Annotation::new(0, 1, "x"), Annotation::new(1, 6, "y"), Annotation::new(2, 4, "ws")];
        let cells = vec![vec![cell(&["1234567"]), c]];
        let layout = layout_table(&cells);
        let offsets = vec![Some(100), Some(120)];
        let mut got = remap_annotations(&cells, &layout, &offsets);
        annotate::sort_annotations(&mut got);
        assert_eq!(
            got,
            [
                Annotation::new(109, 110, "x"),
                Annotation::new(110, 111, "y"),
                Annotation::new(130, 132, "y"),
            ]
        );
    }
}
