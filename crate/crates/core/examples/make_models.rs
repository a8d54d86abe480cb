//! Writes the model files referenced by the sample CLI configs.
//!
//! cargo run --example make_models -- [dir]

use std::path::PathBuf;

use hexfwi::io::write_model;
use hexfwi::{Result, VelocityModel};

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("examples/configs"));
    let two_layer = VelocityModel::from_fn(26, 51, 40.0, 40.0, |_, z| if z < 500.0 { 1800.0 } else { 2200.0 })?;
    let path = dir.join("two_layer.json");
    write_model(&path, &two_layer)?;
    println!("wrote {}", path.display());
    Ok(())
}
