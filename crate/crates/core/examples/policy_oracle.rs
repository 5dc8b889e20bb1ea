//! Build a policy class and ask the argmax oracle for the best policy on a
//! signed, weighted dataset.

use replay_cb::{erm_oracle, ContextId, PolicyClass, Result, WeightedExample};

pub fn run_example() -> Result<(usize, f64)> {
    // all 2^3 tables over three contexts and two actions
    let class = PolicyClass::all_tables(2, 3)?;
    let data = vec![
        WeightedExample::new(ContextId(0), vec![1.0, 0.0]),
        WeightedExample::new(ContextId(1), vec![0.0, 0.5]),
        WeightedExample::new(ContextId(2), vec![-1.0, 0.25]),
        WeightedExample::new(ContextId(2), vec![0.5, 0.0]),
    ];
    let (best, value) = erm_oracle(&data, &class)?;
    println!("class of {} policies, best index {best} scores {value}", class.len());
    println!("best table: {:?}", class.policies()[best].actions());
    Ok((best, value))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
