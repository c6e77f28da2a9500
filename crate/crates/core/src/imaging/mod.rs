//! Slide AoI detection by hierarchical morphology.
//!
//! A slide is inverted so content is bright on a dark background, then dilated
//! with a shrinking square element. Each pass binarizes with Otsu's threshold,
//! labels connected blobs and keeps the convex hulls whose area falls inside a
//! configured fraction of the slide. Accepted regions are erased before the
//! next, finer pass so they are not split further.

mod aoi;
mod components;
mod hull;
mod morphology;
mod otsu;
mod slide;

pub use aoi::{detect_aois, Aoi, AoiParams};
pub use components::connected_components;
pub use hull::convex_hull;
pub use morphology::{dilate, effective_side};
pub use otsu::{between_class_variance, otsu_binarize, otsu_threshold};
pub use slide::{preprocess, SlideImage};
