fn main() {
    // The only environment knob: SRS_THREADS caps the rayon worker count.
    // Results are identical regardless (reductions are order-independent).
    if let Ok(threads) = std::env::var("SRS_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    std::process::exit(srs::cli::run());
}
