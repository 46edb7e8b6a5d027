#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = aon_cli::parse_rational_grid(text) {
        assert!(!grid.is_empty() && grid.len() <= aon_cli::grid::MAX_GRID_POINTS);
    }
    let _ = aon_cli::grid::parse_unit_grid(text);
    let _ = aon_cli::grid::parse_p_grid(text);
});
