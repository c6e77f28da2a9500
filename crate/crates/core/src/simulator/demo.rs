use crate::imaging::Aoi;
use crate::metrics::{PaceScript, PaceSegment};

pub const SLIDE_WIDTH: i64 = 960;
pub const SLIDE_HEIGHT: i64 = 540;

/// A four-region lecture slide: title, text column, figure, footnote.
pub fn demo_aois() -> Vec<Aoi> {
    [
        (280, 30, 400, 50),
        (60, 130, 360, 240),
        (540, 130, 340, 200),
        (200, 420, 560, 60),
    ]
    .iter()
    .enumerate()
    .map(|(id, &(x, y, w, h))| Aoi::rect(id, x, y, w, h).expect("demo rectangles are valid"))
    .collect()
}

/// 10 s segments cycling title, text, figure, text + figure, footnote.
pub fn demo_pace(duration_ms: i64) -> PaceScript {
    const CYCLE: [&[usize]; 5] = [&[0], &[1], &[2], &[1, 2], &[3]];
    let segments = (0..)
        .map(|i: i64| i * 10_000)
        .take_while(|start| *start < duration_ms)
        .enumerate()
        .map(|(i, start)| {
            PaceSegment::new(start, (start + 10_000).min(duration_ms), CYCLE[i % CYCLE.len()].iter().copied())
        })
        .collect();
    PaceScript::new(segments).expect("demo segments are sorted")
}
