//! The binary field format and CSV export.
//!
//!     cargo run --release --example field_io

use schrodinger_hardy::field::Field;
use schrodinger_hardy::grid::Grid;

fn main() -> schrodinger_hardy::Result<()> {
    let grid = Grid::new(2, 1.0, 9)?;
    let f = Field::from_fn(grid, |p| (1.0 - p[0] * p[0]) * (1.0 - p[1] * p[1]));

    let dir = std::env::temp_dir().join("sh_example_io");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("paraboloid.shf");
    f.write(&path)?;
    let size = std::fs::metadata(&path)?.len();
    println!(
        "wrote {} ({size} bytes = 4 magic + 4 + 4 + 8 header + {} * 8 payload)",
        path.display(),
        grid.len()
    );

    let back = Field::read(&path)?;
    println!("roundtrip bit-exact: {}", back == f);

    let mut csv = Vec::new();
    back.write_csv(&mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("csv head:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    println!("  ... ({} rows)", grid.len());
    Ok(())
}
