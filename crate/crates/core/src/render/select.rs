use nalgebra::Vector3;

use crate::compiler::LayeredAsset;
use crate::plane::SlicingPlane;

/// Picks the precomputed state whose offset is closest to where `plane`
/// crosses the bake axis, measured at the plane point nearest the bounds
/// centroid. Planes missing the bounds select the last state. Ties go to
/// the larger offset.
pub fn select_state(asset: &LayeredAsset, plane: &SlicingPlane) -> usize {
    let last = asset.state_count() - 1;
    let bounds = asset.bounds();
    let (lo, hi) = bounds
        .corners()
        .map(|c| plane.signed_distance(&Vector3::from(c)))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    if !(lo <= 0.0 && 0.0 <= hi) {
        return last;
    }

    let centroid = Vector3::from(bounds.center());
    let closest = centroid - plane.signed_distance(&centroid) * plane.normal();
    let axis = Vector3::from(asset.axis().map(f64::from));
    let e = closest.dot(&axis);

    let mut best = (f64::INFINITY, last);
    for (k, c) in asset.offsets().iter().enumerate() {
        let d = (*c as f64 - e).abs();
        if d <= best.0 {
            best = (d, k);
        }
    }
    best.1
}
