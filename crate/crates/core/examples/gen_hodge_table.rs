//! Regenerates crates/core/data/hodge_table.json.
//!
//!     cargo run -p qpl-core --example gen_hodge_table [output-path]

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/hodge_table.json").to_string());
    let table = qpl_core::moduli::generate_hodge_table();
    let text = serde_json::to_string_pretty(&table).expect("serialize table");
    std::fs::write(&path, text + "\n").expect("write table");
    eprintln!("wrote {} entries to {path}", table.entries.len());
}
