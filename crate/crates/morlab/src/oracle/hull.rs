//! Convex coverage set for two objectives via a monotone-chain upper hull.

use super::{pareto_filter, OracleError};
use crate::scalar::Scalar;
use crate::vector::ObjectiveVector;

/// Indices of the maximal points on the upper-right convex hull: exactly the
/// points some non-negative linear weighting can find. Collinear points on a
/// hull edge are all retained, as are duplicates of hull points; the result
/// is ordered by objective-0 value.
pub fn ccs_two_objective<F: Scalar>(points: &[ObjectiveVector<F>]) -> Result<Vec<usize>, OracleError> {
    if let Some(bad) = points.iter().find(|p| p.len() != 2) {
        return Err(OracleError::UnsupportedDimension(bad.len()));
    }
    let pareto = pareto_filter(points);
    if pareto.len() <= 2 {
        let mut result = pareto;
        result.sort_by(|&a, &b| {
            points[a][0].partial_cmp(&points[b][0]).expect("finite values").then(a.cmp(&b))
        });
        return Ok(result);
    }

    // Distinct coordinates of the Pareto-optimal points, sorted by x. Two
    // Pareto points with equal x have equal y, so x values are unique here.
    let mut coords: Vec<(F, F)> = pareto.iter().map(|&i| (points[i][0], points[i][1])).collect();
    coords.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    coords.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);

    // Monotone chain for the upper hull; a middle point is popped only when
    // it lies strictly below the chord, so collinear points survive.
    let cross = |a: (F, F), b: (F, F), c: (F, F)| -> F {
        (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
    };
    let mut chain: Vec<(F, F)> = Vec::with_capacity(coords.len());
    for &point in &coords {
        while chain.len() >= 2
            && cross(chain[chain.len() - 2], chain[chain.len() - 1], point) > F::zero()
        {
            chain.pop();
        }
        chain.push(point);
    }

    let mut result: Vec<usize> = pareto
        .into_iter()
        .filter(|&i| chain.iter().any(|&(x, y)| points[i][0] == x && points[i][1] == y))
        .collect();
    result.sort_by(|&a, &b| {
        points[a][0].partial_cmp(&points[b][0]).expect("finite values").then(a.cmp(&b))
    });
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::vec2;

    #[test]
    fn collinear_pareto_points_all_stay_on_the_hull() {
        let points: Vec<ObjectiveVector<f64>> =
            vec![vec2(0.0, 1.0), vec2(0.5, 0.5), vec2(1.0, 0.0)];
        assert_eq!(ccs_two_objective(&points).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn single_point_is_its_own_hull() {
        let points: Vec<ObjectiveVector<f64>> = vec![vec2(0.3, 0.7)];
        assert_eq!(ccs_two_objective(&points).unwrap(), vec![0]);
    }

    #[test]
    fn interior_and_dominated_points_are_excluded() {
        let points: Vec<ObjectiveVector<f64>> = vec![
            vec2(1.0, 0.0),
            vec2(0.0, 1.0),
            vec2(0.5, 0.5),  // on the chord (0,1)-(1,0)
            vec2(0.6, 0.35), // below the chord
            vec2(0.4, 0.4),  // dominated by (0.5, 0.5)
        ];
        assert_eq!(ccs_two_objective(&points).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn duplicates_of_hull_points_are_retained() {
        let points: Vec<ObjectiveVector<f64>> =
            vec![vec2(0.0, 1.0), vec2(1.0, 0.0), vec2(0.0, 1.0)];
        assert_eq!(ccs_two_objective(&points).unwrap(), vec![0, 2, 1]);
    }

    #[test]
    fn higher_dimensions_are_rejected() {
        let points: Vec<ObjectiveVector<f64>> = vec![ObjectiveVector::new(vec![1.0, 2.0, 3.0])];
        assert!(matches!(
            ccs_two_objective(&points),
            Err(OracleError::UnsupportedDimension(3))
        ));
    }
}
