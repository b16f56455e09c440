use super::entities::ENTITIES;
use super::RAW_TEXT_ELEMENTS;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum Token {
    StartTag {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    EndTag {
        name: String,
    },
    Text(String),
}

/// Splits decoded markup into tags and text. Comments, doctypes and
/// processing instructions are consumed silently.
pub(super) struct Tokenizer<'a> {
    src: &'a str,
    pos: usize,
    /// Set after a raw-text start tag; the next token is its raw content.
    raw_until: Option<String>,
}

impl<'a> Tokenizer<'a> {
    pub(super) fn new(src: &'a str) -> Self {
        Tokenizer {
            src,
            pos: 0,
            raw_until: None,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn raw_text(&mut self, tag: &str) -> Option<Token> {
        let rest = self.rest();
        if tag == "plaintext" {
            self.pos = self.src.len();
            return (!rest.is_empty()).then(|| Token::Text(sanitize_controls(rest)));
        }
        let end = find_raw_end(rest, tag).unwrap_or(rest.len());
        self.pos += end;
        if end == 0 {
            return None;
        }
        let raw = &rest[..end];
        // RCDATA elements still resolve character references.
        let text = if tag == "textarea" || tag == "title" {
            decode_entities(raw, false)
        } else {
            raw.to_string()
        };
        Some(Token::Text(sanitize_controls(&text)))
    }

    /// Text up to the next markup-significant `<`.
    fn text(&mut self) -> Token {
        let rest = self.rest();
        let bytes = rest.as_bytes();
        // The first byte is never the start of markup here, so scanning from 1
        // always makes progress.
        let end = (1..bytes.len())
            .find(|&i| bytes[i] == b'<' && i + 1 < bytes.len() && starts_markup(bytes[i + 1]))
            .unwrap_or(bytes.len());
        self.pos += end;
        Token::Text(sanitize_controls(&decode_entities(&rest[..end], false)))
    }

    /// Skips to just past the next `>` (or EOF).
    fn skip_past_gt(&mut self) {
        match self.rest().find('>') {
            Some(i) => self.pos += i + 1,
            None => self.pos = self.src.len(),
        }
    }

    fn comment(&mut self) {
        let rest = &self.rest()[4..];
        self.pos += 4;
        // `<!-->` and `<!--->` are complete (empty) comments.
        if rest.starts_with('>') {
            self.pos += 1;
            return;
        }
        if rest.starts_with("->") {
            self.pos += 2;
            return;
        }
        match rest.find("-->") {
            Some(i) => self.pos += i + 3,
            None => self.pos = self.src.len(),
        }
    }

    fn end_tag(&mut self) -> Option<Token> {
        self.pos += 2;
        let name = self.tag_name();
        self.skip_past_gt();
        Some(Token::EndTag { name })
    }

    fn tag_name(&mut self) -> String {
        let rest = self.rest();
        let len = rest
            .bytes()
            .take_while(|b| b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b':' | b'.'))
            .count();
        self.pos += len;
        rest[..len].to_ascii_lowercase()
    }

    /// Parses `<name attr=value ...>`. Returns `None` when input ends inside
    /// the tag, in which case the partial tag is discarded.
    fn start_tag(&mut self) -> Option<Token> {
        self.pos += 1;
        let name = self.tag_name();
        let mut attrs: Vec<(String, String)> = Vec::new();
        let mut self_closing = false;
        let bytes = self.src.as_bytes();
        loop {
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos >= bytes.len() {
                return None;
            }
            match bytes[self.pos] {
                b'>' => {
                    self.pos += 1;
                    break;
                }
                b'/' => {
                    self.pos += 1;
                    if bytes.get(self.pos) == Some(&b'>') {
                        self_closing = true;
                        self.pos += 1;
                        break;
                    }
                    continue;
                }
                _ => {}
            }
            // Attribute name: the first character may be anything but a
            // delimiter, including `=`.
            let start = self.pos;
            self.pos += 1;
            while self.pos < bytes.len()
                && !bytes[self.pos].is_ascii_whitespace()
                && !matches!(bytes[self.pos], b'/' | b'>' | b'=')
            {
                self.pos += 1;
            }
            self.pos = ceil_char_boundary(self.src, self.pos);
            let attr_name = self.src[start..self.pos].to_ascii_lowercase();
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let mut value = String::new();
            if bytes.get(self.pos) == Some(&b'=') {
                self.pos += 1;
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
                    self.pos += 1;
                }
                match bytes.get(self.pos) {
                    None => return None,
                    Some(&q @ (b'"' | b'\'')) => {
                        let rest = &self.src[self.pos + 1..];
                        let close = rest.find(q as char)?;
                        value = decode_entities(&rest[..close], true);
                        self.pos += close + 2;
                    }
                    Some(_) => {
                        let rest = self.rest();
                        let len = rest
                            .find(|c: char| c.is_ascii_whitespace() || c == '>')
                            .unwrap_or(rest.len());
                        value = decode_entities(&rest[..len], true);
                        self.pos += len;
                    }
                }
            }
            if !attrs.iter().any(|(n, _)| *n == attr_name) {
                attrs.push((attr_name, sanitize_controls(&value)));
            }
        }
        if RAW_TEXT_ELEMENTS.contains(&name.as_str()) || name == "plaintext" {
            self.raw_until = Some(name.clone());
        }
        Some(Token::StartTag {
            name,
            attrs,
            self_closing,
        })
    }
}

impl Iterator for Tokenizer<'_> {
    type Item = Token;

    fn next(&mut self) -> Option<Token> {
        loop {
            if let Some(tag) = self.raw_until.take() {
                if let Some(tok) = self.raw_text(&tag) {
                    return Some(tok);
                }
            }
            let rest = self.rest();
            if rest.is_empty() {
                return None;
            }
            let b = rest.as_bytes();
            if b[0] != b'<' || b.len() < 2 || !starts_markup(b[1]) {
                return Some(self.text());
            }
            match b[1] {
                b'!' if rest.starts_with("<!--") => self.comment(),
                b'!' | b'?' => self.skip_past_gt(),
                b'/' => {
                    if b.len() > 2 && b[2].is_ascii_alphabetic() {
                        if let Some(tok) = self.end_tag() {
                            return Some(tok);
                        }
                    } else {
                        // `</>` and `</ ...>` are bogus comments.
                        self.skip_past_gt();
                    }
                }
                _ => match self.start_tag() {
                    Some(tok) => return Some(tok),
                    None => self.pos = self.src.len(),
                },
            }
        }
    }
}

fn starts_markup(b: u8) -> bool {
    b.is_ascii_alphabetic() || matches!(b, b'/' | b'!' | b'?')
}

fn ceil_char_boundary(s: &str, mut i: usize) -> usize {
    while i < s.len() && !s.is_char_boundary(i) {
        i += 1;
    }
    i
}

/// Finds `</tag` followed by whitespace, `/` or `>` (ASCII case-insensitive).
fn find_raw_end(rest: &str, tag: &str) -> Option<usize> {
    let bytes = rest.as_bytes();
    let mut from = 0;
    while let Some(i) = rest[from..].find("</") {
        let at = from + i;
        let name_end = at + 2 + tag.len();
        if name_end <= bytes.len()
            && bytes[at + 2..name_end].eq_ignore_ascii_case(tag.as_bytes())
            && bytes
                .get(name_end)
                .is_none_or(|b| b.is_ascii_whitespace() || matches!(b, b'/' | b'>'))
        {
            return Some(at);
        }
        from = at + 2;
    }
    None
}

/// Replaces characters that cannot appear in XML 1.0 text with U+FFFD.
fn sanitize_controls(s: &str) -> String {
    if !s.chars().any(is_forbidden_control) {
        return s.to_string();
    }
    s.chars()
        .map(|c| if is_forbidden_control(c) { '\u{fffd}' } else { c })
        .collect()
}

fn is_forbidden_control(c: char) -> bool {
    matches!(c, '\u{0}'..='\u{8}' | '\u{b}' | '\u{e}'..='\u{1f}' | '\u{fffe}' | '\u{ffff}')
}

fn lookup_entity(name: &str) -> Option<&'static str> {
    ENTITIES
        .binary_search_by(|(k, _)| (*k).cmp(name))
        .ok()
        .map(|i| ENTITIES[i].1)
}

/// Resolves named and numeric character references.
///
/// `in_attribute` applies the attribute-value rule: a legacy reference
/// without `;` that is followed by an alphanumeric or `=` stays literal.
pub fn decode_entities(s: &str, in_attribute: bool) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let (consumed, replacement) = match_reference(rest, in_attribute);
        match replacement {
            Some(r) => out.push_str(&r),
            None => out.push_str(&rest[..consumed]),
        }
        rest = &rest[consumed..];
    }
    out.push_str(rest);
    out
}

/// `s` starts with `&`. Returns bytes consumed and the decoded text, or
/// `None` when the reference is literal text.
fn match_reference(s: &str, in_attribute: bool) -> (usize, Option<String>) {
    let b = s.as_bytes();
    if b.get(1) == Some(&b'#') {
        let hex = matches!(b.get(2), Some(b'x' | b'X'));
        let digits_start = if hex { 3 } else { 2 };
        let digits = b[digits_start..]
            .iter()
            .take_while(|c| if hex { c.is_ascii_hexdigit() } else { c.is_ascii_digit() })
            .count();
        if digits == 0 {
            return (1, None);
        }
        let text = &s[digits_start..digits_start + digits];
        let value = u32::from_str_radix(text, if hex { 16 } else { 10 }).unwrap_or(u32::MAX);
        let mut consumed = digits_start + digits;
        if b.get(consumed) == Some(&b';') {
            consumed += 1;
        }
        return (consumed, Some(numeric_reference(value).to_string()));
    }
    let name_len = b[1..]
        .iter()
        .take(32)
        .take_while(|c| c.is_ascii_alphanumeric())
        .count();
    if name_len == 0 {
        return (1, None);
    }
    let name = &s[1..1 + name_len];
    if b.get(1 + name_len) == Some(&b';') {
        let mut key = String::with_capacity(name_len + 1);
        key.push_str(name);
        key.push(';');
        if let Some(v) = lookup_entity(&key) {
            return (name_len + 2, Some(v.to_string()));
        }
    }
    // Legacy references: longest prefix accepted without `;`.
    for len in (2..=name_len.min(6)).rev() {
        if let Some(v) = lookup_entity(&name[..len]) {
            let next = b.get(1 + len);
            if in_attribute && next.is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'=') {
                return (1, None);
            }
            return (1 + len, Some(v.to_string()));
        }
    }
    (1, None)
}

fn numeric_reference(value: u32) -> char {
    // C1 range is interpreted as windows-1252, as browsers do.
    const C1: [u32; 32] = [
        0x20AC, 0x81, 0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021, 0x02C6, 0x2030, 0x0160,
        0x2039, 0x0152, 0x8D, 0x017D, 0x8F, 0x90, 0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013,
        0x2014, 0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0x9D, 0x017E, 0x0178,
    ];
    let mapped = match value {
        0 => 0xFFFD,
        0x80..=0x9F => C1[(value - 0x80) as usize],
        v => v,
    };
    match char::from_u32(mapped) {
        Some(c) if !is_forbidden_control(c) => c,
        _ => '\u{fffd}',
    }
}
