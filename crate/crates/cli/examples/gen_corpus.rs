//! Writes the randomized differential corpus to `models/random/`.
//!
//! Usage: cargo run -p adverse-cli --example gen_corpus [OUT_DIR]

use std::path::PathBuf;

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/random"));
    std::fs::create_dir_all(&dir).expect("create output directory");
    for (i, (seed, file)) in adverse_cli::corpus::generate(20).into_iter().enumerate() {
        let path = dir.join(format!("rand_{i:02}.gts"));
        let text = format!("# Generated from seed {seed}.\n\n{file}");
        std::fs::write(&path, text).expect("write model");
        println!("{} (seed {seed})", path.display());
    }
}
