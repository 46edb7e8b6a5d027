#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = aon_core::parse_graph(text) {
        // re-serialising an accepted graph must parse back to the same graph
        let again = aon_core::parse_graph(&g.to_edge_list()).expect("round trip");
        assert_eq!(again, g);
    }
});
