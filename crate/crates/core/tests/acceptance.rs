use std::time::Instant;

use tmscat::acceptance::{run, CRITERIA};

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let mut failed = Vec::new();
    for (id, _, _) in CRITERIA {
        let outcome = run(id).expect("criterion id");
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(id);
        }
    }
    let total = start.elapsed().as_secs_f64();
    println!("acceptance total {total:.3} s");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
