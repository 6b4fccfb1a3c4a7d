mod common;

use common::send_and_read;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn both_members_read_in_send_order(picks in prop::collection::vec((any::<usize>(), any::<bool>()), 1..=20)) {
        let sent = send_and_read(&picks).map_err(TestCaseError::fail)?;
        prop_assert_eq!(sent.len(), picks.len());
    }
}

#[test]
fn send_order_differs_from_content_order() {
    // c3 then c1 then c2: index order, not name order, decides.
    let sent = send_and_read(&[(2, false), (0, true), (0, false)]).unwrap();
    let names: Vec<String> = sent.iter().map(|c| c.to_string()).collect();
    assert_eq!(names, ["c3", "c1", "c2"]);
}
