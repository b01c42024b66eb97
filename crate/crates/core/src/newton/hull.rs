use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{domain, Result};

/// One side of a lower convex hull, from left to right.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Side {
    pub start: (i64, i64),
    pub end: (i64, i64),
    /// Exact slope, stored reduced.
    pub slope: Ratio<i64>,
    /// Drop in ordinate, `start.1 - end.1`.
    pub height: i64,
    /// Horizontal extent, `end.0 - start.0`.
    pub length: i64,
    /// Number of lattice segments: `gcd(length, height)`.
    pub degree: i64,
}

impl Side {
    fn new(start: (i64, i64), end: (i64, i64)) -> Self {
        let length = end.0 - start.0;
        let height = start.1 - end.1;
        let degree = length.gcd(&height);
        Side {
            start,
            end,
            slope: Ratio::new(-height, length),
            height,
            length,
            degree,
        }
    }

    /// `e_1 = length / degree`, the horizontal step between lattice points.
    pub fn ramification(&self) -> i64 {
        self.length / self.degree
    }

    /// `h_1 = height / degree`, the vertical drop between lattice points.
    pub fn step_height(&self) -> i64 {
        self.height / self.degree
    }

    /// Lattice points `(s + j e_1, u_s - j h_1)` for `j = 0..=degree`.
    pub fn lattice_points(&self) -> Vec<(i64, i64)> {
        let (e1, h1) = (self.ramification(), self.step_height());
        (0..=self.degree)
            .map(|j| (self.start.0 + j * e1, self.start.1 - j * h1))
            .collect()
    }

    /// Ordinate of the side at abscissa `x` (`start.0 <= x <= end.0`).
    pub fn ordinate_at(&self, x: i64) -> Ratio<i64> {
        Ratio::from_integer(self.start.1) + self.slope * Ratio::from_integer(x - self.start.0)
    }

    pub fn contains(&self, point: (i64, i64)) -> bool {
        (self.start.0..=self.end.0).contains(&point.0)
            && self.ordinate_at(point.0) == Ratio::from_integer(point.1)
    }
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    i128::from(a.0 - o.0) * i128::from(b.1 - o.1) - i128::from(a.1 - o.1) * i128::from(b.0 - o.0)
}

/// All sides of the lower convex hull (monotone chain). Collinear points are
/// merged into a single side.
pub fn full_lower_hull(points: &[(i64, i64)]) -> Result<Vec<Side>> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup_by_key(|p| p.0);
    if pts.len() < 2 {
        return Err(domain("a hull needs at least two points with distinct abscissae"));
    }
    let mut chain: Vec<(i64, i64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while chain.len() >= 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0 {
            chain.pop();
        }
        chain.push(p);
    }
    Ok(chain.windows(2).map(|w| Side::new(w[0], w[1])).collect())
}

/// Principal part of the lower hull: the sides of negative slope.
pub fn lower_hull(points: &[(i64, i64)]) -> Result<Vec<Side>> {
    Ok(full_lower_hull(points)?
        .into_iter()
        .filter(|s| s.height > 0)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_example() {
        let sides = lower_hull(&[(0, 2), (1, 2), (2, 1), (4, 0)]).unwrap();
        assert_eq!(sides.len(), 1);
        assert_eq!(sides[0].start, (0, 2));
        assert_eq!(sides[0].end, (4, 0));
        assert_eq!(sides[0].slope, Ratio::new(-1, 2));
        assert_eq!(sides[0].degree, 2);
        assert_eq!(sides[0].lattice_points(), vec![(0, 2), (2, 1), (4, 0)]);
    }

    #[test]
    fn two_sided_example() {
        let sides = lower_hull(&[(0, 4), (1, 2), (2, 1), (3, 2), (4, 0)]).unwrap();
        let slopes: Vec<_> = sides.iter().map(|s| s.slope).collect();
        assert_eq!(slopes, vec![Ratio::new(-2, 1), Ratio::new(-1, 1), Ratio::new(-1, 2)]);
    }

    #[test]
    fn collinear_points_give_one_side() {
        let sides = lower_hull(&[(0, 3), (1, 2), (2, 1), (3, 0)]).unwrap();
        assert_eq!(sides.len(), 1);
        assert_eq!(sides[0].degree, 3);
    }

    #[test]
    fn binomial_side() {
        let sides = lower_hull(&[(0, 1), (9, 0)]).unwrap();
        assert_eq!(sides.len(), 1);
        assert_eq!(sides[0].slope, Ratio::new(-1, 9));
    }

    #[test]
    fn horizontal_tail_is_not_principal() {
        let full = full_lower_hull(&[(0, 2), (2, 0), (5, 0)]).unwrap();
        assert_eq!(full.len(), 2);
        assert_eq!(lower_hull(&[(0, 2), (2, 0), (5, 0)]).unwrap().len(), 1);
    }

    #[test]
    fn too_few_points() {
        assert!(lower_hull(&[(0, 1)]).is_err());
        assert!(lower_hull(&[(3, 1), (3, 0)]).is_err());
    }
}
