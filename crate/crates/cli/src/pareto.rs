//! Two-dimensional Pareto fronts over model measurements.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Axes {
    RecallPrecision,
    SizePrecision,
    SizeRecall,
}

impl Axes {
    pub const ALL: [Axes; 3] = [Axes::RecallPrecision, Axes::SizePrecision, Axes::SizeRecall];

    pub fn as_str(self) -> &'static str {
        match self {
            Axes::RecallPrecision => "recall_precision",
            Axes::SizePrecision => "size_precision",
            Axes::SizeRecall => "size_recall",
        }
    }

    /// Whether the first coordinate is a size (minimized).
    fn minimizes_x(self) -> bool {
        !matches!(self, Axes::RecallPrecision)
    }
}

impl fmt::Display for Axes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axes {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axes::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown axes '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Point {
        Point { id: id.into(), x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParetoFront {
    pub axes: Axes,
    pub points: Vec<Point>,
}

/// Nondominated points, sizes minimized and recall/precision maximized.
/// Of identical points the smallest id stays. Output is sorted by `(x, y,
/// id)`.
pub fn pareto_front(points: &[Point], axes: Axes) -> ParetoFront {
    let sign = if axes.minimizes_x() { -1.0 } else { 1.0 };
    let mut ranked: Vec<&Point> = points.iter().collect();
    // Best oriented x first, then best y, then smallest id.
    ranked.sort_by(|a, b| {
        (sign * b.x)
            .total_cmp(&(sign * a.x))
            .then(b.y.total_cmp(&a.y))
            .then_with(|| a.id.cmp(&b.id))
    });
    let mut best_y = f64::NEG_INFINITY;
    let mut front: Vec<Point> = Vec::new();
    for p in ranked {
        if p.y > best_y {
            best_y = p.y;
            front.push(p.clone());
        }
    }
    front.sort_by(|a, b| cmp_coordinates(a, b));
    ParetoFront { axes, points: front }
}

fn cmp_coordinates(a: &Point, b: &Point) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then_with(|| a.id.cmp(&b.id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recall_precision_example() {
        let pts = [Point::new("a", 0.9, 0.3), Point::new("b", 0.8, 0.5), Point::new("c", 0.7, 0.4)];
        let f = pareto_front(&pts, Axes::RecallPrecision);
        let ids: Vec<_> = f.points.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, vec!["b", "a"]);
    }

    #[test]
    fn sizes_are_minimized() {
        let pts = [Point::new("big", 100.0, 0.5), Point::new("small", 10.0, 0.5), Point::new("sharp", 50.0, 0.9)];
        let ids: Vec<_> = pareto_front(&pts, Axes::SizePrecision).points.into_iter().map(|p| p.id).collect();
        assert_eq!(ids, vec!["small", "sharp"]);
    }

    #[test]
    fn single_and_duplicate_points() {
        let one = [Point::new("x", 1.0, 1.0)];
        assert_eq!(pareto_front(&one, Axes::SizeRecall).points, one.to_vec());
        let dup = [Point::new("z", 0.5, 0.5), Point::new("y", 0.5, 0.5)];
        let f = pareto_front(&dup, Axes::RecallPrecision);
        assert_eq!(f.points, vec![Point::new("y", 0.5, 0.5)]);
    }
}
