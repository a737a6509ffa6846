use mprlab::*;
use mprlab::sim::*;
fn main() {
    for (warm, meas) in [(100_000u64, 1_000_000u64), (1_000_000, 5_000_000), (5_000_000, 5_000_000), (20_000_000, 5_000_000)] {
        for m in [2usize, 4] { for w0 in [16u32, 32] {
        let mut c = SimConfig::new(NetworkParams::table1(1000, m), BackoffParams::new(2.0, w0).unwrap());
        c.warmup_slots = warm; c.measure_slots = meas; c.seed = 5;
        let t = std::time::Instant::now();
        let s = run(&c).unwrap();
        println!("warm {warm} meas {meas} M{m} W{w0}: Npt {:.4} pc {:.4} thr {:.5e} caps {} {:?}", 1000.0*s.pt_hat, s.pc_hat, s.throughput, s.stage_cap_hits, t.elapsed());
    }}}
}
