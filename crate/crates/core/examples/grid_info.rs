//! Hexagonal grid sizing for a frequency sweep over a layered model.
//!
//! cargo run --example grid_info

use hexfwi::{HexGrid, NodeKind, Result, VelocityModel};

fn main() -> Result<()> {
    let model = VelocityModel::from_fn(51, 101, 20.0, 20.0, |_, z| 1500.0 + 1.2 * z)?;
    println!("model: {:.0} m x {:.0} m, c in [{:.0}, {:.0}] m/s", model.width(), model.depth(), model.min_velocity(), model.max_velocity());
    println!("{:>6} {:>9} {:>9} {:>8} {:>8} {:>8}", "f (Hz)", "h (m)", "pml (m)", "nodes", "interior", "pml");
    for f in [1.0, 2.0, 4.0, 8.0] {
        let grid = HexGrid::build(&model, f, 8.5, 1.0)?;
        let count = |k| grid.kinds().iter().filter(|&&x| x == k).count();
        println!(
            "{f:>6} {:>9.2} {:>9.1} {:>8} {:>8} {:>8}",
            grid.spacing(),
            grid.pml_thickness(),
            grid.len(),
            count(NodeKind::Interior),
            count(NodeKind::Pml)
        );
    }
    Ok(())
}
