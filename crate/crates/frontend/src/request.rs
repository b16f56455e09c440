use htmlflow::{CompiledRules, Converter, ExportFormat, RenderedDocument, RuleError, StyleProfile};
use thiserror::Error;

/// Annotation rules as given by the caller.
#[derive(Debug, Clone, PartialEq)]
pub enum RulesSource {
    /// Rule file contents.
    Text(String),
    /// Already-parsed JSON, as embedded in a service request.
    Value(serde_json::Value),
}

/// Everything needed for one conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionRequest {
    pub html: Vec<u8>,
    pub encoding_hint: Option<String>,
    pub rules: Option<RulesSource>,
    pub format: ExportFormat,
    /// Style profile overrides as JSON text.
    pub profile_overrides: Option<String>,
}

impl ConversionRequest {
    pub fn new(html: impl Into<Vec<u8>>) -> Self {
        ConversionRequest {
            html: html.into(),
            encoding_hint: None,
            rules: None,
            format: ExportFormat::Plain,
            profile_overrides: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RequestError {
    #[error("annotation rules: {0}")]
    Rules(#[from] RuleError),
    #[error("style profile: {0}")]
    Profile(#[from] htmlflow::ProfileError),
    #[error("unknown encoding label {0:?}")]
    Encoding(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversionOutput {
    pub document: RenderedDocument,
    /// `document` serialized in the requested format.
    pub output: String,
}

/// Builds a converter for the request's rules and profile.
pub fn build_converter(request: &ConversionRequest) -> Result<Converter, RequestError> {
    let rules = match &request.rules {
        None => CompiledRules::empty(),
        Some(RulesSource::Text(text)) => CompiledRules::from_json(text)?,
        Some(RulesSource::Value(value)) => CompiledRules::from_value(value)?,
    };
    let profile = match &request.profile_overrides {
        None => StyleProfile::default(),
        Some(json) => StyleProfile::from_overrides_json(json)?,
    };
    Ok(Converter::new().with_rules(rules).with_profile(profile))
}

pub fn convert(request: &ConversionRequest) -> Result<ConversionOutput, RequestError> {
    if let Some(label) = &request.encoding_hint {
        if !htmlflow::dom::is_known_encoding(label) {
            return Err(RequestError::Encoding(label.clone()));
        }
    }
    let converter = build_converter(request)?;
    let document = converter.convert(&request.html, request.encoding_hint.as_deref());
    let output = htmlflow::export(&document, request.format);
    Ok(ConversionOutput { document, output })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_without_rules_have_no_annotations() {
        for format in ExportFormat::ALL {
            let mut request = ConversionRequest::new("<b>x</b>");
            request.format = format;
            let out = convert(&request).unwrap();
            assert!(out.document.annotations.is_empty());
            assert_eq!(out.document.text, "x\n");
        }
    }

    #[test]
    fn invalid_inputs_are_reported() {
        let mut request = ConversionRequest::new("x");
        request.rules = Some(RulesSource::Text(r#"{"": ["a"]}"#.into()));
        assert!(matches!(convert(&request), Err(RequestError::Rules(_))));

        let mut request = ConversionRequest::new("x");
        request.profile_overrides = Some(r#"{"p": {"bogus": 1}}"#.into());
        assert!(matches!(convert(&request), Err(RequestError::Profile(_))));

        let mut request = ConversionRequest::new("x");
        request.encoding_hint = Some("no-such-charset".into());
        assert!(matches!(convert(&request), Err(RequestError::Encoding(_))));
    }
}
