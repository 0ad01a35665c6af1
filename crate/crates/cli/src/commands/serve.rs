use std::net::TcpListener;

use twsbr_core::server::{LiveOptions, LiveServer, Session};

use super::load_scenario;
use crate::args::ServeArgs;
use crate::error::{CliError, CliResult};

pub fn run(args: &ServeArgs) -> CliResult {
    let scenario = load_scenario(&args.scenario)?;
    let port = match std::env::var("PORT") {
        Ok(v) => v
            .parse::<u16>()
            .map_err(|_| CliError::Config(format!("PORT `{v}` is not a valid port")))?,
        Err(_) => args.port,
    };
    if !(args.speed >= 0.0 && args.speed.is_finite()) {
        return Err(CliError::Config("--speed must be >= 0".into()));
    }
    let session = Session::new(scenario, args.decimation).map_err(|e| CliError::Config(e.to_string()))?;
    let listener = TcpListener::bind((args.host.as_str(), port))
        .map_err(|e| CliError::Config(format!("cannot bind {}:{port}: {e}", args.host)))?;
    let addr = listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut server = LiveServer::start(
        session,
        LiveOptions {
            speed: args.speed,
            log_path: args.log.clone(),
            ..Default::default()
        },
    );
    server.serve_tcp(listener).map_err(|e| CliError::Runtime(e.to_string()))?;
    eprintln!("twsbr: listening on {addr}");
    server.wait();
    Ok(())
}
