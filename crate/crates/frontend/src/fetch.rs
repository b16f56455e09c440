use std::time::Duration;

use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const MAX_REDIRECTS: u32 = 5;
/// Responses larger than this are rejected.
pub const MAX_RESPONSE_BYTES: u64 = 256 * 1024 * 1024;

const USER_AGENT: &str = concat!("htmlflow/", env!("CARGO_PKG_VERSION"), " (HTML to text converter)");

#[derive(Debug, Error)]
pub enum FetchError {
    #[error("{url}: unsupported URL scheme (expected http or https)")]
    Scheme { url: String },
    #[error("{url}: server answered with HTTP status {status}")]
    Status { url: String, status: u16 },
    #[error("{url}: {cause}")]
    Transport { url: String, cause: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub body: Vec<u8>,
    /// `charset` parameter of the Content-Type header, if any.
    pub charset: Option<String>,
}

pub fn is_url(input: &str) -> bool {
    let lower = input.get(..8).unwrap_or(input).to_ascii_lowercase();
    lower.starts_with("http://") || lower.starts_with("https://")
}

/// GETs `url`, following at most [`MAX_REDIRECTS`] redirects.
pub fn fetch_url(url: &str, timeout: Duration) -> Result<Fetched, FetchError> {
    if !is_url(url) {
        return Err(FetchError::Scheme { url: url.to_string() });
    }
    let transport = |cause: ureq::Error| FetchError::Transport {
        url: url.to_string(),
        cause: cause.to_string(),
    };
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .max_redirects(MAX_REDIRECTS)
        .user_agent(USER_AGENT)
        .http_status_as_error(false)
        .build()
        .into();
    let mut response = agent.get(url).call().map_err(transport)?;
    let status = response.status().as_u16();
    if status >= 400 {
        return Err(FetchError::Status {
            url: url.to_string(),
            status,
        });
    }
    let charset = response
        .headers()
        .get("content-type")
        .and_then(|v| v.to_str().ok())
        .and_then(htmlflow::dom::charset_from_content_type)
        .map(str::to_string);
    let body = response
        .body_mut()
        .with_config()
        .limit(MAX_RESPONSE_BYTES)
        .read_to_vec()
        .map_err(transport)?;
    Ok(Fetched { body, charset })
}
