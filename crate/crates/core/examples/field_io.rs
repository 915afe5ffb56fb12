//! Writing the eigenfunction 𝒴 to a field file and reading it back bit for bit.

use nlw_threshold::ground_state::GroundState;
use nlw_threshold::io::FieldFile;
use nlw_threshold::linearized::{assemble_l, ground_eigenpair};
use nlw_threshold::RadialGrid;

fn main() -> nlw_threshold::Result<()> {
    let gs = GroundState::new(&RadialGrid::new(6, 20.0, 400)?)?;
    let eig = ground_eigenpair(&assemble_l(&gs))?;
    let path = std::env::temp_dir().join("eigenfunction_d6.field");
    FieldFile::from_field(&eig.y, "eigenfunction")
        .with_meta("e0", eig.e0)
        .save(&path)?;

    let back = FieldFile::load(&path)?;
    let y = back.fields()?.remove(0);
    println!("{}: kind {}, d = {}, R = {}, N = {}", path.display(), back.kind, back.dim, back.radius, back.nodes);
    println!("e0 round trip exact: {}", back.meta_f64("e0")? == eig.e0);
    println!("values identical: {}", y.values() == eig.y.values());
    std::fs::remove_file(path)?;
    Ok(())
}
