use alloc::vec;
use alloc::vec::Vec;

use crate::math::floor;
use crate::model::Point3;

type Cell = (i64, i64, i64);

/// Uniform-grid index for fixed-radius neighbor queries.
struct Grid {
    eps: f64,
    entries: Vec<(Cell, u32)>,
}

impl Grid {
    fn new(points: &[Point3], eps: f64) -> Self {
        let mut entries: Vec<(Cell, u32)> =
            points.iter().enumerate().map(|(i, p)| (cell(p, eps), i as u32)).collect();
        entries.sort_unstable();
        Self { eps, entries }
    }

    fn neighbors(&self, points: &[Point3], i: usize, out: &mut Vec<u32>) {
        out.clear();
        let p = &points[i];
        let c = cell(p, self.eps);
        let eps2 = self.eps * self.eps;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let key = (c.0 + dx, c.1 + dy, c.2 + dz);
                    let start = self.entries.partition_point(|e| e.0 < key);
                    for &(k, j) in &self.entries[start..] {
                        if k != key {
                            break;
                        }
                        if points[j as usize].distance_squared(p) <= eps2 {
                            out.push(j);
                        }
                    }
                }
            }
        }
    }
}

fn cell(p: &Point3, eps: f64) -> Cell {
    (floor(p.x / eps) as i64, floor(p.y / eps) as i64, floor(p.z / eps) as i64)
}

/// Density-based clustering. A point with at least `min_pts` points
/// (itself included) within `eps` is a core point; clusters are the core
/// points reachable from each other plus their border points. Returns a
/// cluster index per point, `None` for noise. Labels follow input order.
pub fn dbscan(points: &[Point3], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let grid = Grid::new(points, eps);
    let mut label: Vec<Option<usize>> = vec![None; points.len()];
    let mut visited = vec![false; points.len()];
    let mut nbrs = Vec::new();
    let mut cluster = 0usize;
    for i in 0..points.len() {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        grid.neighbors(points, i, &mut nbrs);
        if nbrs.len() < min_pts {
            continue;
        }
        label[i] = Some(cluster);
        let mut stack: Vec<u32> = nbrs.clone();
        while let Some(j) = stack.pop() {
            let j = j as usize;
            if label[j].is_none() {
                label[j] = Some(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            grid.neighbors(points, j, &mut nbrs);
            if nbrs.len() >= min_pts {
                stack.extend_from_slice(&nbrs);
            }
        }
        cluster += 1;
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(c: [f64; 3], n: usize) -> Vec<Point3> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 0.7;
                Point3::new(c[0] + 0.05 * crate::math::cos(a), c[1] + 0.05 * crate::math::sin(a), c[2])
            })
            .collect()
    }

    #[test]
    fn two_blobs_and_noise() {
        let mut pts = blob([0.0, 0.0, 0.0], 10);
        pts.extend(blob([3.0, 0.0, 0.0], 8));
        pts.push(Point3::new(10.0, 10.0, 10.0));
        let l = dbscan(&pts, 0.3, 5);
        assert!(l[..10].iter().all(|x| *x == Some(0)));
        assert!(l[10..18].iter().all(|x| *x == Some(1)));
        assert_eq!(l[18], None);
    }

    #[test]
    fn sparse_points_are_noise() {
        let pts: Vec<Point3> = (0..10).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        assert!(dbscan(&pts, 0.3, 5).iter().all(Option::is_none));
    }
}
