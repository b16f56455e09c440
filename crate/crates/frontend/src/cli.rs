use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use htmlflow::ExportFormat;

use crate::fetch::{self, fetch_url};
use crate::request::{convert, ConversionRequest, RequestError, RulesSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Converts HTML to layout-preserving plain text.
#[derive(Debug, Parser)]
#[command(name = "convert", version)]
pub struct Args {
    /// File path, `-` for stdin, or an http(s) URL.
    #[arg(default_value = "-")]
    pub input: String,

    /// Write output to FILE instead of stdout.
    #[arg(short = 'o', long = "output", value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Input character encoding (e.g. utf-8, iso-8859-1).
    #[arg(long, value_name = "LABEL")]
    pub encoding: Option<String>,

    /// JSON file mapping selectors to label lists.
    #[arg(long = "annotation-rules", value_name = "FILE")]
    pub annotation_rules: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_name = "FORMAT", default_value = "plain", value_parser = parse_format)]
    pub postprocessor: ExportFormat,

    /// JSON file with style profile overrides.
    #[arg(long, value_name = "FILE")]
    pub profile: Option<PathBuf>,

    /// Fetch timeout for URL inputs.
    #[arg(long, value_name = "SECONDS", default_value_t = 30.0, value_parser = parse_timeout)]
    pub timeout: f64,
}

fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse().map_err(|e: htmlflow::export::UnknownFormat| e.to_string())
}

fn parse_timeout(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
        _ => Err(format!("{s:?} is not a positive number of seconds")),
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn io_failure(what: &str, path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("cannot {what} {}: {e}", path.display()),
    }
}

fn read_input(args: &Args) -> Result<(Vec<u8>, Option<String>), Failure> {
    if args.input == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("cannot read stdin: {e}"),
        })?;
        Ok((buf, None))
    } else if fetch::is_url(&args.input) {
        let fetched = fetch_url(&args.input, Duration::from_secs_f64(args.timeout)).map_err(|e| Failure {
            code: EXIT_IO,
            message: e.to_string(),
        })?;
        Ok((fetched.body, fetched.charset))
    } else {
        let path = PathBuf::from(&args.input);
        let bytes = std::fs::read(&path).map_err(|e| io_failure("read", &path, e))?;
        Ok((bytes, None))
    }
}

fn execute(args: &Args, stdout: &mut dyn Write) -> Result<(), Failure> {
    let rules = match &args.annotation_rules {
        Some(path) => Some(RulesSource::Text(
            std::fs::read_to_string(path).map_err(|e| io_failure("read", path, e))?,
        )),
        None => None,
    };
    let profile_overrides = match &args.profile {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| io_failure("read", path, e))?),
        None => None,
    };
    let mut request = ConversionRequest {
        html: Vec::new(),
        encoding_hint: args.encoding.clone(),
        rules,
        format: args.postprocessor,
        profile_overrides,
    };
    // Validate everything before touching the network or stdin.
    if let Err(e) = crate::request::build_converter(&request) {
        return Err(usage(e));
    }
    if let Some(label) = &args.encoding {
        if !htmlflow::dom::is_known_encoding(label) {
            return Err(usage(RequestError::Encoding(label.clone())));
        }
    }
    let (html, charset) = read_input(args)?;
    request.html = html;
    if request.encoding_hint.is_none() {
        request.encoding_hint = charset.filter(|c| htmlflow::dom::is_known_encoding(c));
    }
    let output = convert(&request).map_err(usage)?.output;
    match &args.output {
        Some(path) => std::fs::write(path, output).map_err(|e| io_failure("write", path, e)),
        None => stdout
            .write_all(output.as_bytes())
            .and_then(|()| stdout.flush())
            .map_err(|e| Failure {
                code: EXIT_IO,
                message: format!("cannot write stdout: {e}"),
            }),
    }
}

fn usage(e: RequestError) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: e.to_string(),
    }
}

/// Runs the command line client and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = sink.write_all(rendered.as_bytes());
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match execute(&args, stdout) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(stderr, "convert: {}", failure.message);
            failure.code
        }
    }
}
