use std::net::{IpAddr, Ipv4Addr, SocketAddr};

use anyhow::Context;
use clap::Parser;
use qrmap_service::{router, AppState, DEFAULT_CACHE_TILES, DEFAULT_PORT};

#[derive(Parser)]
#[command(name = "qrmap-service", version, about = "Tile and classification API for the qrmap explorer")]
struct Args {
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    /// Listen on all interfaces instead of loopback only.
    #[arg(long)]
    expose: bool,
    /// Tiles kept in memory; 0 disables the cache.
    #[arg(long, default_value_t = DEFAULT_CACHE_TILES)]
    cache_tiles: usize,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let args = Args::parse();
    let ip = if args.expose { IpAddr::V4(Ipv4Addr::UNSPECIFIED) } else { IpAddr::V4(Ipv4Addr::LOCALHOST) };
    let addr = SocketAddr::new(ip, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(AppState::new(args.cache_tiles))).await?;
    Ok(())
}
