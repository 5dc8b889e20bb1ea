//! Derived schedule constants, block layout and replay-start law.

use replay_cb::rng::{stream, Stream};
use replay_cb::scheduler::sample_replay_start;
use replay_cb::{compute_schedule_params, Result, ScheduleParams};

pub fn run_example() -> Result<ScheduleParams> {
    let p = compute_schedule_params(1024, 2, 4, 0.05)?;
    println!("C0 = {:.4}, L = {}", p.c0, p.l);
    for j in 0..4 {
        println!(
            "block {j}: rounds {}, nu = {:.5}, replay start prob = {:.6}",
            p.block_interval(1, j),
            p.nu(j),
            p.replay_probability(j)
        );
    }
    let mut coin = stream(1, Stream::ReplayCoin);
    let mut index = stream(1, Stream::ReplayIndex);
    let mut counts = [0u32; 3];
    for _ in 0..200_000 {
        if let Some((m, _)) = sample_replay_start(3, &p, &mut coin, &mut index) {
            counts[m as usize] += 1;
        }
    }
    println!("replay starts by index in block 3 over 200000 rounds: {counts:?}");
    Ok(p)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
