//! Regenerates the synthetic fixture files.
//!
//! Usage: `cargo run -p rcf-core --example gen_fixtures [OUT_DIR]`
//! (default: `RCF_FIXTURE_DIR` or `fixtures/` at the workspace root).

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(rcf_core::fixtures::fixture_dir);
    std::fs::create_dir_all(&dir)?;
    for (name, contents) in rcf_core::fixtures::all_fixtures() {
        let path = dir.join(name);
        std::fs::write(&path, contents)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
