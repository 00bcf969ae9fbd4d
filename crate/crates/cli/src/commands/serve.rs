use std::net::SocketAddr;

use metaemu_service::ServiceConfig;

use crate::args::ServeArgs;
use crate::error::CliError;

pub fn run(args: &ServeArgs) -> Result<(), CliError> {
    if !args.fit.exists() {
        return Err(CliError::Input(format!("file not found: {}", args.fit.display())));
    }
    let config = ServiceConfig {
        fit: args.fit.clone(),
        presets_dir: args.presets_dir.clone(),
        data: args.data.clone(),
    };
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(metaemu_service::serve(SocketAddr::new(args.host, args.port), config))?;
    Ok(())
}
