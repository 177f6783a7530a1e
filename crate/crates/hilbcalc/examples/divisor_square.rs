//! Squares the divisor class `a_{-1}(h) a_{-1}(1)|0>` on `P2^[2]` and prints
//! the result as JSON. This is the library example from the README.

use hilbcalc::engine::Engine;
use hilbcalc::fock::FockVector;
use hilbcalc::surface::{CohClass, SurfaceModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SurfaceModel::builtin("P2")?;
    let engine = Engine::new(model.clone());

    let h = CohClass::basis(model.basis_index("h").unwrap());
    let class = FockVector::vacuum()
        .create(&model, 1, &h)
        .create(&model, 1, &model.unit_class());

    let square = engine.cup(&class, &class, 2)?;
    println!("{}", serde_json::to_string(&square.to_json(&model))?);
    Ok(())
}
