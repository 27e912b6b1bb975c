use gauss_reflect::rng::{tag, CounterRng};
fn main() {
    for seed in [7u64, 12345, 999] {
        let mut buf4 = [0.0f64; 4];
        let (mut s, mut ss, mut m) = (0.0f64, 0.0f64, 0u64);
        for path in 0..500u64 {
            let rng = CounterRng::new(seed, path, tag::STEP_NOISE);
            for step in 0..50_000u64 {
                rng.standard_normals(step, &mut buf4);
                for v in buf4 { s += v; ss += v*v; m += 1; }
            }
        }
        let mean = s / m as f64;
        let var = ss / m as f64 - mean * mean;
        let sd = (2.0 / m as f64).sqrt();
        println!("seed={seed}: n={m} mean={:.6} var={:.7} z={:+.2}", mean, var, (var-1.0)/sd);
    }
    // per-lane variance: maybe one Box-Muller lane is off
    let rng = CounterRng::new(42, 0, tag::STEP_NOISE);
    let mut buf = [0.0f64; 4];
    let mut lane_ss = [0.0f64; 4];
    let n = 20_000_000u64;
    for step in 0..n {
        rng.standard_normals(step, &mut buf);
        for (i, v) in buf.iter().enumerate() { lane_ss[i] += v * v; }
    }
    for (i, ss) in lane_ss.iter().enumerate() {
        let var = ss / n as f64;
        println!("lane {i}: var={:.7} z={:+.2}", var, (var-1.0)/(2.0/n as f64).sqrt());
    }
}
