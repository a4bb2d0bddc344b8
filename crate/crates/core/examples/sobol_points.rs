//! Sobol points, a random shift and a map into a parameter box.

use momentopt::numerics::Vector;
use momentopt::quasirandom::{map_to_box, random_shift, sobol};

fn main() -> momentopt::Result<()> {
    let ps = sobol(2, 8)?;
    let shifted = random_shift(&ps, 42);
    println!("shift = {:?}", shifted.shift().unwrap_or_default());
    let boxed = map_to_box(&shifted, &Vector::from_vec(vec![-1.0, 0.1]), &Vector::from_vec(vec![1.0, 4.0]))?;
    for ((u, s), b) in ps.points().iter().zip(shifted.points()).zip(&boxed) {
        println!("{u:.4?} -> {s:.4?} -> [{:.4}, {:.4}]", b[0], b[1]);
    }
    Ok(())
}
