mod common;

use common::golden::golden_mismatches;

#[test]
fn renderings_match_golden_files() {
    let problems = golden_mismatches();
    assert!(problems.is_empty(), "{}", problems.join("\n"));
}
