use crate::error::{Error, Result};
use crate::network::PointPattern;

/// Matérn type-I thinning: keeps exactly the points with no other point
/// within shortest-path distance `h`. Both members of a close pair die.
pub fn matern_thin(pattern: &PointPattern, h: f64) -> Result<PointPattern> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "hard core must be positive, got {h}"
        )));
    }
    let net = pattern.network();
    let pts = pattern.points();
    let mut dead = vec![false; pts.len()];
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if net.distance(&pts[i], &pts[j]) <= h {
                dead[i] = true;
                dead[j] = true;
            }
        }
    }
    Ok(pattern.filter(|i, _| !dead[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::test_nets::segment;
    use std::sync::Arc;

    #[test]
    fn close_pair_both_removed() {
        let net = Arc::new(segment(10.0));
        let pts = [0.0, 1.0, 3.0]
            .iter()
            .map(|&o| net.point(0, o).unwrap())
            .collect();
        let x = PointPattern::new(Arc::clone(&net), pts).unwrap();
        let y = matern_thin(&x, 1.5).unwrap();
        assert_eq!(y.len(), 1);
        assert_eq!(y.points()[0].offset, 3.0);
        assert_eq!(matern_thin(&x, 0.5).unwrap().len(), 3);
        assert!(matern_thin(&x, 0.0).is_err());
    }
}
