use encoding_rs::{Encoding, UTF_8};

use super::tokenizer::{Token, Tokenizer};

const PRESCAN_BYTES: usize = 1024;

/// Decodes document bytes to text.
///
/// Unknown labels are ignored. A byte order mark takes precedence over both
/// the hint and the meta declaration, as in browsers.
pub fn decode_html(input: &[u8], encoding_hint: Option<&str>) -> String {
    let encoding = encoding_hint
        .and_then(|label| Encoding::for_label(label.trim().as_bytes()))
        .or_else(|| sniff_meta_charset(input))
        .unwrap_or(UTF_8);
    let (text, _, _) = encoding.decode(input);
    text.into_owned()
}

/// Whether `label` names an encoding [`decode_html`] understands.
pub fn is_known_encoding(label: &str) -> bool {
    Encoding::for_label(label.trim().as_bytes()).is_some()
}

/// Looks for a `<meta charset>` or `<meta http-equiv content="...charset=">`
/// declaration in the first 1024 bytes.
pub fn sniff_meta_charset(input: &[u8]) -> Option<&'static Encoding> {
    let head = &input[..input.len().min(PRESCAN_BYTES)];
    let head = String::from_utf8_lossy(head);
    for token in Tokenizer::new(&head) {
        let Token::StartTag { name, attrs, .. } = token else {
            continue;
        };
        if name != "meta" {
            continue;
        }
        let label = attrs
            .iter()
            .find(|(n, _)| n == "charset")
            .map(|(_, v)| v.as_str())
            .or_else(|| {
                attrs
                    .iter()
                    .find(|(n, _)| n == "content")
                    .and_then(|(_, v)| charset_from_content_type(v))
            });
        if let Some(enc) = label.and_then(|l| Encoding::for_label(l.trim().as_bytes())) {
            // A meta declaration cannot select UTF-16: the bytes were readable
            // as ASCII, so they are not UTF-16.
            return Some(if enc == encoding_rs::UTF_16LE || enc == encoding_rs::UTF_16BE {
                UTF_8
            } else {
                enc
            });
        }
    }
    None
}

/// Extracts the `charset` parameter of a Content-Type style value.
pub fn charset_from_content_type(value: &str) -> Option<&str> {
    let lower = value.to_ascii_lowercase();
    let at = lower.find("charset")?;
    let rest = value[at + "charset".len()..].trim_start();
    let rest = rest.strip_prefix('=')?.trim_start();
    let rest = rest.trim_start_matches(['"', '\'']);
    let end = rest
        .find(|c: char| c == ';' || c == '"' || c == '\'' || c.is_ascii_whitespace())
        .unwrap_or(rest.len());
    (end > 0).then(|| &rest[..end])
}
