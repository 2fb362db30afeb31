//! Run a TOML experiment the way `pdd train` does, without the binary.
//!
//!     cargo run --release --example experiment_config [config.toml]

use std::path::{Path, PathBuf};

use pdd::cli::{cmd_train, exit_code, RunOptions};

fn main() {
    let path: PathBuf = std::env::args().nth(1).map_or_else(
        || Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smrd_inline.toml"),
        PathBuf::from,
    );
    match cmd_train(
        &path,
        &RunOptions {
            force: true,
            seed_override: None,
        },
    ) {
        Ok(s) => println!("artifacts in {}", s.output_dir.display()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
