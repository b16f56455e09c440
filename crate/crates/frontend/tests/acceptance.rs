//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Set `HTMLFLOW_BLESS=1` to rewrite the nested-table
//! golden files.

#[path = "../../core/tests/support/mod.rs"]
mod support;
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use htmlflow::export::{to_jsonl, to_surface_html, to_xml};
use htmlflow::{parse_str, CompiledRules, Converter, ElementTree, RenderedDocument};
use htmlflow_frontend::service::ServiceConfig;
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

fn all_rules() -> CompiledRules {
    CompiledRules::from_json(&support::rules_json(support::RULE_SELECTORS)).unwrap()
}

fn table_alignment() -> Outcome {
    let started = Instant::now();
    let mut rng = support::rng(1);
    for i in 0..200 {
        let table = support::GridTable::random(&mut rng);
        let text = Converter::new().convert_str(&table.to_html()).text;
        table
            .check_alignment(&text)
            .map_err(|e| format!("table {i}: {e}\n{}", table.to_html()))?;
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(5) {
        return Err(format!("200 tables took {elapsed:?} (limit 5 s)"));
    }
    Ok(format!("200/200 tables aligned in {elapsed:?}"))
}

fn nested_documents() -> Vec<(PathBuf, String)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir().join("nested"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "html"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let html = std::fs::read_to_string(&p).unwrap();
            (p, html)
        })
        .collect()
}

fn max_table_depth(tree: &ElementTree) -> usize {
    fn depth(e: &htmlflow::Element) -> usize {
        let below = e.elements().map(depth).max().unwrap_or(0);
        below + usize::from(e.tag == "table")
    }
    depth(&tree.root)
}

fn nested_tables() -> Outcome {
    let bless = std::env::var_os("HTMLFLOW_BLESS").is_some();
    let docs = nested_documents();
    if docs.len() != 20 {
        return Err(format!("expected 20 documents, found {}", docs.len()));
    }
    let render = |t: &ElementTree| Converter::new().render_tree(t).text;
    let mut depths = [0usize; 4];
    for (path, html) in &docs {
        let name = path.file_name().unwrap().to_string_lossy();
        let tree = parse_str(html);
        let depth = max_table_depth(&tree);
        if !(2..=3).contains(&depth) {
            return Err(format!("{name}: nesting depth {depth}, expected 2 or 3"));
        }
        depths[depth] += 1;
        for table in tree.root.descendants().filter(|e| e.tag == "table") {
            support::check_table_containment(table, &render).map_err(|e| format!("{name}: {e}"))?;
        }
        let text = render(&tree);
        let golden = path.with_extension("txt");
        if bless {
            std::fs::write(&golden, &text).unwrap();
        }
        let expected = std::fs::read_to_string(&golden).map_err(|e| format!("{}: {e}", golden.display()))?;
        if text != expected {
            return Err(format!("{name}: output differs from golden file\n--- expected\n{expected}--- got\n{text}"));
        }
    }
    Ok(format!(
        "20/20 golden files match ({} two-level, {} three-level); containment holds at every level",
        depths[2], depths[3]
    ))
}

fn whitespace_oracle() -> Outcome {
    let mut rng = support::rng(3);
    for i in 0..1000 {
        let html = support::random_inline_document(&mut rng);
        let tree = parse_str(&html);
        let got = Converter::new().render_tree(&tree).text;
        let want = support::inline_oracle(&tree);
        if got != want {
            return Err(format!("document {i} {html:?}: got {got:?}, oracle {want:?}"));
        }
    }
    Ok("1000/1000 inline documents equal the regex oracle".into())
}

fn margin_collapsing() -> Outcome {
    let mut checked = 0;
    for after in 0..=3 {
        for before in 0..=3 {
            for (lead, trail) in [(0, 0), (3, 3), (2, 1)] {
                let html = format!(
                    r#"<div style="margin-top: {lead}em">first</div><div style="margin-bottom: {after}em">x</div><div style="margin-top: {before}em">y</div><div style="margin-bottom: {trail}em">last</div>"#
                );
                let text = Converter::new().convert_str(&html).text;
                let lines: Vec<&str> = text.strip_suffix('\n').unwrap_or(&text).split('\n').collect();
                let x = lines.iter().position(|l| *l == "x").ok_or("x missing")?;
                let y = lines.iter().position(|l| *l == "y").ok_or("y missing")?;
                let blanks = y - x - 1;
                if blanks != after.max(before) {
                    return Err(format!("({after}, {before}): {blanks} blank lines in {text:?}"));
                }
                if text.starts_with('\n') || text.ends_with("\n\n") {
                    return Err(format!("({after}, {before}) lead {lead} trail {trail}: stray blank lines in {text:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} margin combinations collapse to max; no leading/trailing blank lines"))
}

fn annotation_soundness() -> Outcome {
    let mut rng = support::rng(5);
    let mut spans = 0;
    for i in 0..500 {
        let html = support::random_annotated_document(&mut rng);
        let selectors = support::random_rules(&mut rng);
        let tree = parse_str(&html);
        let rules = CompiledRules::from_json(&support::rules_json(&selectors)).unwrap();
        let doc = Converter::new().with_rules(rules).render_tree(&tree);
        support::check_annotation_text(&tree, &doc, &selectors)
            .map_err(|e| format!("document {i}: {e}\nhtml: {html:?}"))?;
        spans += doc.annotations.len();
    }
    Ok(format!("500/500 documents sound ({spans} spans checked)"))
}

/// Every HTML input the acceptance suite knows about.
fn full_corpus() -> Vec<String> {
    let mut corpus: Vec<String> = nested_documents().into_iter().map(|(_, html)| html).collect();
    let fixtures: Vec<Value> = serde_json::from_str(&std::fs::read_to_string(data_dir().join("parity.json")).unwrap()).unwrap();
    corpus.extend(fixtures.iter().map(|f| f["html"].as_str().unwrap().to_string()));
    let mut rng = support::rng(6);
    corpus.extend((0..300).map(|_| support::random_annotated_document(&mut rng)));
    corpus.extend((0..100).map(|_| support::random_inline_document(&mut rng)));
    corpus.extend(support::malformed_corpus(100, 8));
    corpus
}

fn check_exports(doc: &RenderedDocument) -> Result<(), String> {
    let xml = to_xml(doc);
    let body = xml
        .strip_prefix("<document>")
        .and_then(|x| x.strip_suffix("</document>"))
        .ok_or("xml output is not wrapped in <document>")?;
    if support::unwrap_xml(body) != doc.text {
        return Err("xml does not unwrap to the text".into());
    }
    let line = to_jsonl(doc);
    if !line.ends_with('\n') || line.matches('\n').count() != 1 {
        return Err("jsonl is not exactly one line".into());
    }
    let value: Value = serde_json::from_str(&line).map_err(|e| format!("jsonl does not parse: {e}"))?;
    let text = value["text"].as_str().ok_or("jsonl text missing")?;
    let labels = value["label"].as_array().ok_or("jsonl label missing")?;
    let annotations: Vec<htmlflow::Annotation> = labels
        .iter()
        .map(|t| {
            htmlflow::Annotation::new(
                t[0].as_u64().unwrap() as usize,
                t[1].as_u64().unwrap() as usize,
                t[2].as_str().unwrap(),
            )
        })
        .collect();
    support::check_annotations(text, &annotations)?;
    let (pre_text, spans) =
        support::surface_html_contents(&to_surface_html(doc)).ok_or("surface html has no <pre> block")?;
    if pre_text != doc.text {
        return Err("surface html <pre> text differs from the text".into());
    }
    if spans < doc.annotations.len() {
        return Err(format!("{spans} spans for {} annotations", doc.annotations.len()));
    }
    Ok(())
}

fn export_round_trips() -> Outcome {
    let corpus = full_corpus();
    let converter = Converter::new().with_rules(all_rules());
    let mut annotations = 0;
    for (i, html) in corpus.iter().enumerate() {
        let doc = converter.convert_str(html);
        annotations += doc.annotations.len();
        check_exports(&doc).map_err(|e| format!("corpus document {i}: {e}\nhtml: {html:?}"))?;
    }
    Ok(format!(
        "{} documents ({annotations} annotations): xml, jsonl and surface html round-trip",
        corpus.len()
    ))
}

fn cli_service_parity() -> Outcome {
    let fixtures: Vec<Value> =
        serde_json::from_str(&std::fs::read_to_string(data_dir().join("parity.json")).unwrap()).unwrap();
    if fixtures.len() != 30 {
        return Err(format!("expected 30 fixtures, found {}", fixtures.len()));
    }
    let base = common::spawn_service(ServiceConfig::default());
    let dir = tempfile::tempdir().unwrap();
    for (i, fixture) in fixtures.iter().enumerate() {
        let page = dir.path().join(format!("{i}.html"));
        std::fs::write(&page, fixture["html"].as_str().unwrap()).unwrap();
        let format = fixture["postprocessor"].as_str().unwrap_or("plain");
        let mut args = vec![page.to_str().unwrap().to_string(), "--postprocessor".into(), format.into()];
        if let Some(rules) = fixture.get("annotation_rules") {
            let path = dir.path().join(format!("{i}.rules.json"));
            std::fs::write(&path, rules.to_string()).unwrap();
            args.extend(["--annotation-rules".to_string(), path.to_str().unwrap().to_string()]);
        }
        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let cli = common::run_cli(&arg_refs, b"");
        if cli.status.code() != Some(0) {
            return Err(format!("fixture {i}: cli exit {:?}", cli.status.code()));
        }
        let cli_out = String::from_utf8(cli.stdout).map_err(|e| e.to_string())?;
        let (status, response) = common::post_get_text(&base, &fixture.to_string());
        if status != 200 {
            return Err(format!("fixture {i}: service status {status}"));
        }
        let same = match format {
            "xml" | "html" => response["output"].as_str() == Some(cli_out.as_str()),
            "jsonl" => {
                let line: Value = serde_json::from_str(&cli_out).map_err(|e| e.to_string())?;
                line["text"] == response["text"] && line["label"] == response["annotations"]
            }
            _ => response["text"].as_str() == Some(cli_out.as_str()),
        };
        if !same {
            return Err(format!("fixture {i} ({format}): cli {cli_out:?} != service {response}"));
        }
    }

    // Documented error paths.
    let bad_rules = dir.path().join("bad-rules.json");
    std::fs::write(&bad_rules, r#"{"": ["x"]}"#).unwrap();
    let cli_cases: [(&[&str], i32); 4] = [
        (&["--postprocessor", "bogus"], 2),
        (&["--annotation-rules", bad_rules.to_str().unwrap()], 2),
        (&["/nonexistent/input.html"], 1),
        (&["--version"], 0),
    ];
    for (args, code) in cli_cases {
        let out = common::run_cli(args, b"<p>x</p>");
        if out.status.code() != Some(code) {
            return Err(format!("cli {args:?}: exit {:?}, expected {code}", out.status.code()));
        }
    }
    let service_cases = [
        ("not json".to_string(), 400),
        (json!({"html": "x", "postprocessor": "bogus"}).to_string(), 400),
        (json!({"html": "x", "annotation_rules": {"": ["a"]}}).to_string(), 400),
    ];
    for (body, code) in &service_cases {
        let (status, value) = common::post_get_text(&base, body);
        if status != *code || !value["error"].is_string() {
            return Err(format!("service {body}: status {status}, body {value}"));
        }
    }
    let small = common::spawn_service(ServiceConfig { max_body_bytes: 4096 });
    let (status, _) = common::post_get_text(&small, &json!({"html": "x".repeat(8192)}).to_string());
    if status != 413 {
        return Err(format!("oversized body: status {status}, expected 413"));
    }
    Ok("30/30 fixtures identical via CLI and service; 8 error paths return documented codes".into())
}

fn robustness() -> Outcome {
    let corpus = support::malformed_corpus(100, 9);
    let converter = Converter::new().with_rules(all_rules());
    for (i, html) in corpus.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(|| {
            let tree = htmlflow::parse_html(html.as_bytes(), None);
            (converter.render_tree(&tree), converter.convert_str(html))
        }));
        let (doc, again) = result.map_err(|_| format!("document {i} panicked: {html:?}"))?;
        if doc != again {
            return Err(format!("document {i}: byte and string paths disagree"));
        }
        support::check_document(&doc, support::may_start_with_break(html))
            .and_then(|()| check_exports(&doc))
            .map_err(|e| format!("document {i}: {e}\nhtml: {html:?}"))?;
    }
    Ok("100/100 malformed documents converted; all structural invariants hold".into())
}

fn large_document() -> String {
    let mut html = String::from("<!DOCTYPE html><html><head><title>big</title></head><body>");
    let mut section = 0;
    while html.len() < (1 << 20) {
        html.push_str(&format!(
            "<h2>Section {section}</h2><p>Paragraph with <b>bold</b>, <a href=\"#s{section}\">a link</a> &amp; entities.</p>"
        ));
        html.push_str("<table><tr><th>Item</th><th>Amount</th><th>Breakdown</th></tr>");
        for row in 0..30 {
            html.push_str(&format!(
                "<tr><td>item {row}</td><td align=\"right\">{}</td><td><table><tr><td>a</td><td>{}</td></tr><tr><td>b</td><td>{}</td></tr></table></td></tr>",
                row * 101,
                row % 7,
                row % 5
            ));
        }
        html.push_str("</table>");
        section += 1;
    }
    html.push_str("</body></html>");
    html
}

fn performance() -> Outcome {
    let html = large_document();
    let tables = html.matches("<table>").count();
    let converter = Converter::new();
    let _ = converter.convert(html.as_bytes(), None);
    let mut best = Duration::MAX;
    for _ in 0..3 {
        let started = Instant::now();
        let doc = converter.convert(html.as_bytes(), None);
        best = best.min(started.elapsed());
        if doc.text.is_empty() {
            return Err("empty output".into());
        }
    }
    let size = html.len();
    if tables < 50 || size < (1 << 20) {
        return Err(format!("input too small: {size} bytes, {tables} tables"));
    }
    if best >= Duration::from_secs(1) {
        return Err(format!("{size} bytes with {tables} tables took {best:?}"));
    }
    Ok(format!("{size} bytes with {tables} tables converted in {best:?}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table alignment", table_alignment),
        ("nested tables", nested_tables),
        ("whitespace oracle", whitespace_oracle),
        ("margin collapsing", margin_collapsing),
        ("annotation soundness", annotation_soundness),
        ("export round-trips", export_round_trips),
        ("cli/service parity", cli_service_parity),
        ("robustness", robustness),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
