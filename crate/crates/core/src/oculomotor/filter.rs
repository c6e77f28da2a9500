use super::GazeSample;

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Width-3 sliding median on each coordinate; endpoints pass through.
pub fn smooth(samples: &[GazeSample]) -> Vec<GazeSample> {
    let mut out = samples.to_vec();
    if samples.len() < 3 {
        return out;
    }
    for i in 1..samples.len() - 1 {
        let (a, b, c) = (&samples[i - 1], &samples[i], &samples[i + 1]);
        out[i].x = median3(a.x, b.x, c.x);
        out[i].y = median3(a.y, b.y, c.y);
    }
    out
}
