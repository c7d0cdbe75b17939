//! Runs every acceptance criterion at its pinned tolerance and prints one
//! line per criterion.

use chronoflip::reproduce::{run_all, ReproduceConfig, CRITERIA};

#[test]
fn acceptance() {
    let results = run_all(&ReproduceConfig::default());
    println!();
    assert_eq!(results.len(), CRITERIA.len());
    for r in &results {
        println!("{}  [{:.2} s]", r.line(), r.wall_time_s);
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "{}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
