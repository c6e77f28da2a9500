//! Brute-force oracles and fixtures shared by the integration targets.
#![allow(dead_code)]

use peergaze::geometry::{PixelPoint, Point};
use peergaze::imaging::{Aoi, SlideImage};
use peergaze::oculomotor::GazeSample;
use peergaze::session::ClientEvent;
use peergaze::simulator::{SimRng, StudentStream};

/// White 960×540 slide with two black 100×80 rectangles at (100,100) and (500,300).
pub fn two_rect_slide() -> SlideImage {
    let mut slide = SlideImage::filled(960, 540, 255).unwrap();
    slide.fill_rect(100, 100, 200, 180, 0);
    slide.fill_rect(500, 300, 600, 380, 0);
    slide
}

pub const FIXTURE_RECTS: [(i64, i64, i64, i64); 2] = [(100, 100, 100, 80), (500, 300, 100, 80)];

pub fn random_image(rng: &mut SimRng, w: usize, h: usize) -> SlideImage {
    let levels = 2 + rng.index(30);
    let palette: Vec<u8> = (0..levels).map(|_| rng.index(256) as u8).collect();
    let pixels = (0..w * h).map(|_| palette[rng.index(levels)]).collect();
    SlideImage::new(w, h, pixels).unwrap()
}

/// Otsu by exhaustive search with exact rational comparison of
/// `(N·s0 − n0·S)² / (n0·n1)` over all 256 thresholds; smallest argmax wins.
/// A constant image returns its intensity.
pub fn brute_otsu(pixels: &[u8]) -> u8 {
    if pixels.iter().all(|&p| p == pixels[0]) {
        return pixels[0];
    }
    let n = pixels.len() as i128;
    let total: i128 = pixels.iter().map(|&p| p as i128).sum();
    let mut best: Option<(u8, i128, i128)> = None;
    for t in 0..=255u8 {
        let below: Vec<i128> = pixels.iter().filter(|&&p| p <= t).map(|&p| p as i128).collect();
        let n0 = below.len() as i128;
        let n1 = n - n0;
        let (num, den) = if n0 == 0 || n1 == 0 {
            (0, 1)
        } else {
            let d = n * below.iter().sum::<i128>() - n0 * total;
            (d * d, n0 * n1)
        };
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((t, num, den));
        }
    }
    best.unwrap().0
}

fn orient(o: PixelPoint, a: PixelPoint, b: PixelPoint) -> i64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Hull by checking every ordered pair: `a → b` is an edge when no point lies to
/// its right and collinear points sit between `a` and `b`.
pub fn brute_hull(points: &[PixelPoint]) -> Vec<PixelPoint> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let mut next = std::collections::BTreeMap::new();
    for &a in &pts {
        for &b in &pts {
            if a == b {
                continue;
            }
            let edge = pts.iter().all(|&p| {
                let o = orient(a, b, p);
                o > 0
                    || (o == 0
                        && p.x >= a.x.min(b.x)
                        && p.x <= a.x.max(b.x)
                        && p.y >= a.y.min(b.y)
                        && p.y <= a.y.max(b.y))
            });
            if edge {
                next.insert(a, b);
            }
        }
    }
    let start = *next.keys().next().unwrap();
    let mut hull = vec![start];
    let mut cur = next[&start];
    while cur != start {
        hull.push(cur);
        cur = next[&cur];
    }
    hull
}

pub fn random_points(rng: &mut SimRng, n: usize, span: i64) -> Vec<PixelPoint> {
    (0..n)
        .map(|_| PixelPoint::new(rng.index(span as usize) as i64, rng.index(span as usize) as i64))
        .collect()
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.x + t * dx, a.y + t * dy);
    ((p.x - qx).powi(2) + (p.y - qy).powi(2)).sqrt()
}

/// Point in a CCW convex polygon, boundary included.
pub fn brute_inside(hull: &[PixelPoint], p: Point) -> bool {
    (0..hull.len()).all(|i| {
        let a = hull[i].to_point();
        let b = hull[(i + 1) % hull.len()].to_point();
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

/// `(aoi id, distance)` by scanning every edge of every hull.
pub fn brute_assign(p: Point, aois: &[Aoi]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for a in aois {
        let d = if brute_inside(&a.hull, p) {
            0.0
        } else {
            (0..a.hull.len())
                .map(|i| seg_dist(p, a.hull[i].to_point(), a.hull[(i + 1) % a.hull.len()].to_point()))
                .fold(f64::INFINITY, f64::min)
        };
        if d < best.1 || (d == best.1 && a.id < best.0) {
            best = (a.id, d);
        }
    }
    best
}

pub fn random_aois(rng: &mut SimRng, n: usize) -> Vec<Aoi> {
    (0..n)
        .map(|id| {
            let (ox, oy) = (rng.index(800) as i64, rng.index(400) as i64);
            let pts: Vec<PixelPoint> = (0..12)
                .map(|_| PixelPoint::new(ox + rng.index(120) as i64, oy + rng.index(120) as i64))
                .collect();
            Aoi::from_points(id, &pts).unwrap()
        })
        .collect()
}

/// Gaze samples of a simulated stream with face presence applied.
pub fn gaze_samples(stream: &StudentStream) -> Vec<GazeSample> {
    let mut face = true;
    let mut out = Vec::new();
    for e in &stream.events {
        match *e {
            ClientEvent::Face { present, .. } => face = present,
            ClientEvent::Gaze { t, x, y } => out.push(GazeSample {
                face_present: face,
                ..GazeSample::new(stream.user.clone(), t, x, y)
            }),
            _ => {}
        }
    }
    out
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Design `[1, x]` with `x ~ N(0,1)` and labels drawn from `sigmoid(β·row)`.
pub fn logistic_data(beta: &[f64; 2], n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
    let mut rng = SimRng::new(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let v = rng.normal();
        y.push(rng.uniform() < sigmoid(beta[0] + beta[1] * v));
        x.push(vec![1.0, v]);
    }
    (x, y)
}

pub fn log_likelihood(x: &[Vec<f64>], y: &[bool], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            // log σ(η) = −log(1+e^{−η}); log(1−σ(η)) = −log(1+e^{η})
            if yi {
                -(-eta).exp().ln_1p()
            } else {
                -eta.exp().ln_1p()
            }
        })
        .sum()
}

/// Maximum likelihood by steepest ascent with backtracking line search.
pub fn gradient_ascent_logistic(x: &[Vec<f64>], y: &[bool]) -> Vec<f64> {
    let k = x[0].len();
    let n = x.len() as f64;
    let mut beta = vec![0.0; k];
    let mut ll = log_likelihood(x, y, &beta);
    let mut step = 1.0 / n;
    for _ in 0..100_000 {
        let mut grad = vec![0.0; k];
        for (row, &yi) in x.iter().zip(y) {
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let r = f64::from(u8::from(yi)) - sigmoid(eta);
            for j in 0..k {
                grad[j] += r * row[j];
            }
        }
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2.sqrt() / n < 1e-12 {
            break;
        }
        step *= 4.0;
        loop {
            let cand: Vec<f64> = beta.iter().zip(&grad).map(|(b, g)| b + step * g).collect();
            let cand_ll = log_likelihood(x, y, &cand);
            if cand_ll >= ll + 0.25 * step * gnorm2 {
                let moved = cand.iter().zip(&beta).any(|(c, b)| c != b);
                if !moved {
                    return beta;
                }
                beta = cand;
                ll = cand_ll;
                break;
            }
            step *= 0.5;
            if step < 1e-30 {
                return beta;
            }
        }
    }
    beta
}
