use crate::error::{Error, Result};

use super::{GazeSample, ThresholdRule, VelocityThreshold};

/// Gaze velocity in px/ms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Velocity {
    pub vx: f64,
    pub vy: f64,
}

/// Central differences, one-sided at the ends. A single sample has zero velocity.
pub fn velocities(samples: &[GazeSample]) -> Result<Vec<Velocity>> {
    let n = samples.len();
    if let Some(w) = samples.windows(2).find(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidStream(format!(
            "timestamps must strictly increase within a run, got {} then {}",
            w[0].t, w[1].t
        )));
    }
    if n < 2 {
        return Ok(vec![Velocity::default(); n]);
    }
    let diff = |a: &GazeSample, b: &GazeSample| {
        let dt = (b.t - a.t) as f64;
        Velocity {
            vx: (b.x - a.x) / dt,
            vy: (b.y - a.y) / dt,
        }
    };
    let mut out = Vec::with_capacity(n);
    out.push(diff(&samples[0], &samples[1]));
    for i in 1..n - 1 {
        out.push(diff(&samples[i - 1], &samples[i + 1]));
    }
    out.push(diff(&samples[n - 2], &samples[n - 1]));
    Ok(out)
}

/// Median; even-length input averages the two middle values. `None` if empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    })
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let med = median(&v).expect("nonempty");
    (median(&sq).expect("nonempty") - med * med).max(0.0)
}

/// Per-axis thresholds `μ = λ·(median(v²) − median(v)²)` (clamped at 0).
pub fn ek_threshold(velocities: &[Velocity], lambda: f64) -> Result<VelocityThreshold> {
    threshold_with_rule(velocities, lambda, ThresholdRule::Variance)
}

pub(crate) fn threshold_with_rule(
    velocities: &[Velocity],
    lambda: f64,
    rule: ThresholdRule,
) -> Result<VelocityThreshold> {
    if velocities.is_empty() {
        return Err(Error::InvalidArgument(
            "velocity threshold needs at least one velocity".into(),
        ));
    }
    let sx = spread(velocities.iter().map(|v| v.vx));
    let sy = spread(velocities.iter().map(|v| v.vy));
    let (mx, my) = match rule {
        ThresholdRule::Variance => (sx, sy),
        ThresholdRule::StdDev => (sx.sqrt(), sy.sqrt()),
    };
    Ok(VelocityThreshold {
        lambda,
        mu_x: lambda * mx,
        mu_y: lambda * my,
    })
}
