#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(task) = glider_core::io::parse_task(text) {
            for i in 0..task.waypoints.len() {
                assert!(task.waypoint_ned(i).iter().all(|x| x.is_finite()));
            }
        }
    }
});
