use std::net::{IpAddr, SocketAddr};

use clap::Parser;
use htmlflow_frontend::service::{self, ServiceConfig};

/// HTTP service: `POST /get_text`, `GET /health`.
#[derive(Debug, Parser)]
#[command(name = "convert-serve", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, default_value_t = 5000)]
    port: u16,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    let config = match ServiceConfig::from_env() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("convert-serve: {e}");
            std::process::exit(2);
        }
    };
    let address = SocketAddr::new(args.bind, args.port);
    let listener = match service::bind(address).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("convert-serve: cannot bind {address}: {e}");
            std::process::exit(1);
        }
    };
    eprintln!("convert-serve: listening on http://{address}");
    if let Err(e) = service::serve(listener, config).await {
        eprintln!("convert-serve: {e}");
        std::process::exit(1);
    }
}
