mod common;

use common::run_cli;

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn converts_stdin_by_default() {
    let out = run_cli(&[], b"<p>a</p><p>b</p>");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "a\n\nb\n");
    assert!(out.stderr.is_empty());
    assert_eq!(stdout(&run_cli(&["-"], b"<b>x</b>")), "x\n");
}

#[test]
fn converts_file_to_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("page.html");
    let output = dir.path().join("page.txt");
    std::fs::write(&input, "<ul><li>x</li></ul>").unwrap();
    let out = run_cli(&[input.to_str().unwrap(), "-o", output.to_str().unwrap()], b"");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&output).unwrap(), "  * x\n");
}

#[test]
fn html_postprocessor_with_rules() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("page.html");
    let rules = dir.path().join("rules.json");
    std::fs::write(&page, "<h1>Title</h1><p>body</p>").unwrap();
    std::fs::write(&rules, r#"{"h1": ["heading"]}"#).unwrap();
    let out = run_cli(
        &[
            page.to_str().unwrap(),
            "--postprocessor",
            "html",
            "--annotation-rules",
            rules.to_str().unwrap(),
        ],
        b"",
    );
    assert_eq!(out.status.code(), Some(0));
    let html = stdout(&out);
    assert!(html.starts_with("<!DOCTYPE html>"));
    assert!(html.contains(r#"<span class="label-heading" title="heading">Title</span>"#), "{html}");
}

#[test]
fn xml_and_jsonl_postprocessors() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    std::fs::write(&rules, r#"{"b": ["emphasis"]}"#).unwrap();
    let rules = rules.to_str().unwrap();
    let xml = run_cli(&["--postprocessor", "xml", "--annotation-rules", rules], b"<b>bold</b>");
    assert_eq!(stdout(&xml), "<document><emphasis>bold</emphasis>\n</document>");
    let jsonl = run_cli(&["--postprocessor", "jsonl", "--annotation-rules", rules], b"<b>bold</b>");
    assert_eq!(stdout(&jsonl), "{\"text\":\"bold\\n\",\"label\":[[0,4,\"emphasis\"]]}\n");
}

#[test]
fn encoding_flag() {
    let out = run_cli(&["--encoding", "iso-8859-1"], b"caf\xe9");
    assert_eq!(stdout(&out), "café\n");
    let out = run_cli(&[], b"caf\xe9");
    assert_eq!(stdout(&out), "caf\u{fffd}\n");
}

#[test]
fn profile_flag() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.json");
    std::fs::write(&profile, r#"{"div": {"margin-before": 2}}"#).unwrap();
    let out = run_cli(&["--profile", profile.to_str().unwrap()], b"a<div>b</div>");
    assert_eq!(stdout(&out), "a\n\n\nb\n");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_rules = dir.path().join("bad.json");
    std::fs::write(&bad_rules, r##"{"#x=y": ["a"]}"##).unwrap();
    let broken_json = dir.path().join("broken.json");
    std::fs::write(&broken_json, "{\"b\": [").unwrap();

    let cases: &[(&[&str], i32)] = &[
        (&["--postprocessor", "bogus"], 2),
        (&["--no-such-flag"], 2),
        (&["--annotation-rules", bad_rules.to_str().unwrap()], 2),
        (&["--annotation-rules", broken_json.to_str().unwrap()], 2),
        (&["--profile", broken_json.to_str().unwrap()], 2),
        (&["--annotation-rules", "/nonexistent/rules.json"], 1),
        (&["/nonexistent/page.html"], 1),
        (&["--version"], 0),
        (&["--help"], 0),
    ];
    for (args, code) in cases {
        let out = run_cli(args, b"<p>x</p>");
        assert_eq!(out.status.code(), Some(*code), "{args:?}");
        if *code != 0 {
            assert!(out.stdout.is_empty(), "{args:?}");
            assert!(!out.stderr.is_empty(), "{args:?}");
        }
    }
}

#[test]
fn rule_error_names_selector() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.json");
    std::fs::write(&rules, r##"{"#x=y": ["a"]}"##).unwrap();
    let out = run_cli(&["--annotation-rules", rules.to_str().unwrap()], b"");
    assert!(String::from_utf8(out.stderr).unwrap().contains("#x=y"));
}
