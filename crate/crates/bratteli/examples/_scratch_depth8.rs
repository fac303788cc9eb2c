use bratteli::constructions::{build_golden, GoldenParams};
fn main() {
    let start = std::time::Instant::now();
    let c = build_golden(GoldenParams::geometric(8, 256)).unwrap();
    println!("built in {:?}", start.elapsed());
    for st in &c.steps {
        println!("n={} k={} K={}", st.n, st.k, st.cumulative_k);
    }
    for n in 1..=8 {
        let t = std::time::Instant::now();
        let ok = c.offset_within_budget(n).unwrap();
        println!("offset budget n={n}: {ok} ({:?})", t.elapsed());
    }
    for level in 2..=8 {
        for v in 0..2 {
            let t = std::time::Instant::now();
            let wc = c.word_stats(level, v).unwrap();
            println!("word {level}.{v}: K={} run_ok={} band={} ({:?})", wc.k_run, wc.run_bound_ok, wc.band_ok, t.elapsed());
        }
    }
    for n in 1..=6 {
        let t = std::time::Instant::now();
        let mb = c.suffix_mass_bound(n).unwrap();
        println!("mass bound n={n}: ok={} counts={:?} ({:?})", mb.ok, mb.violating_counts, t.elapsed());
    }
    println!("alpha = {}", c.alpha_interval());
    println!("beta  = {}", c.beta_interval());
    println!("total {:?}", start.elapsed());
}
