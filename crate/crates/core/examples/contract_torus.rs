//! Minimal end-to-end use of the library: sample a Gaussian torus, contract
//! it exactly two independent ways, and inspect the plan's walk norms.

use num_complex::Complex64;
use tn_core::gaussian::fill_gaussian;
use tn_core::network::{build_torus, contract_reference};
use tn_core::swallow::{contract_exact, delta_norms, greedy_order, plan_swallowing};

fn main() -> Result<(), tn_core::Error> {
    let mut tn = build_torus(3, 4, 2)?;
    fill_gaussian(&mut tn, Complex64::new(1.0, 0.0), 7);

    let chi = contract_exact(&tn, None)?; // greedy order
    let reference = contract_reference(&tn)?;
    assert!((chi - reference).norm() <= 1e-10 * reference.norm());

    let plan = plan_swallowing(&tn, &greedy_order(&tn))?;
    let norms = delta_norms(&tn, &plan)?; // Delta_1, Delta_2 for the MC regime
    println!("chi = {chi}, Delta_1 = {}", norms.delta1);
    Ok(())
}
