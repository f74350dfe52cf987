//! Connected-component labeling and convex-hull rasterization.

use super::{NucleusMask, PATCH_AREA, PATCH_SIZE};
use crate::{Error, Result};

/// 8-connected flood fill from `seed`, marking `visited` and returning the
/// component's pixels in discovery order.
fn flood_fill(bitmap: &[bool], visited: &mut [bool], seed: usize) -> Vec<(i32, i32)> {
    let mut stack = vec![seed];
    let mut pixels = Vec::new();
    visited[seed] = true;
    while let Some(idx) = stack.pop() {
        let (r, c) = ((idx / PATCH_SIZE) as i32, (idx % PATCH_SIZE) as i32);
        pixels.push((r, c));
        for dr in -1..=1i32 {
            for dc in -1..=1i32 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nr, nc) = (r + dr, c + dc);
                if nr < 0 || nc < 0 || nr >= PATCH_SIZE as i32 || nc >= PATCH_SIZE as i32 {
                    continue;
                }
                let nidx = nr as usize * PATCH_SIZE + nc as usize;
                if bitmap[nidx] && !visited[nidx] {
                    visited[nidx] = true;
                    stack.push(nidx);
                }
            }
        }
    }
    pixels
}

/// Cross product of (b - a) × (p - a). Positive means `p` is on the left
/// of the directed line a→b in (x=col, y=row) coordinates.
#[inline]
fn cross(a: (i32, i32), b: (i32, i32), p: (i32, i32)) -> i64 {
    let (ar, ac) = (a.0 as i64, a.1 as i64);
    let (br, bc) = (b.0 as i64, b.1 as i64);
    let (pr, pc) = (p.0 as i64, p.1 as i64);
    (bc - ac) * (pr - ar) - (br - ar) * (pc - ac)
}

/// Andrew's monotone chain over integer points. Input need not be sorted.
/// Returns the hull vertices in a consistent winding order; collinear
/// interior points are dropped. Degenerate inputs yield 1 or 2 vertices.
fn monotone_chain(points: &[(i32, i32)]) -> Vec<(i32, i32)> {
    let mut pts = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<(i32, i32)> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        // All points collinear: keep the two extremes.
        return vec![pts[0], pts[n - 1]];
    }
    hull
}

/// Boundary-inclusive point-in-hull test for hulls produced by
/// [`monotone_chain`].
fn hull_contains(hull: &[(i32, i32)], p: (i32, i32)) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            let (a, b) = (hull[0], hull[1]);
            if cross(a, b, p) != 0 {
                return false;
            }
            let dot = (p.0 as i64 - a.0 as i64) * (b.0 as i64 - a.0 as i64)
                + (p.1 as i64 - a.1 as i64) * (b.1 as i64 - a.1 as i64);
            let len_sq = (b.0 as i64 - a.0 as i64).pow(2) + (b.1 as i64 - a.1 as i64).pow(2);
            (0..=len_sq).contains(&dot)
        }
        _ => {
            // Convex polygon with consistent winding: p is inside iff it is
            // never on the outer side of an edge.
            let mut sign = 0i64;
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let cr = cross(a, b, p);
                if cr == 0 {
                    continue;
                }
                if sign == 0 {
                    sign = cr.signum();
                } else if sign != cr.signum() {
                    return false;
                }
            }
            true
        }
    }
}

/// Label 8-connected components, select the largest by pixel count (ties
/// go to the component containing the lexicographically smallest
/// `(row, col)`), and replace it by its rasterized filled convex hull.
pub fn largest_component_hull(bitmap: &[bool]) -> Result<NucleusMask> {
    if bitmap.len() != PATCH_AREA {
        return Err(Error::dim("largest_component_hull", PATCH_AREA, bitmap.len()));
    }
    let mut visited = vec![false; PATCH_AREA];
    let mut best: Option<Vec<(i32, i32)>> = None;
    for idx in 0..PATCH_AREA {
        if bitmap[idx] && !visited[idx] {
            // Row-major scanning means each component is discovered at its
            // lexicographically smallest pixel, so a strict size comparison
            // implements the tie rule.
            let component = flood_fill(bitmap, &mut visited, idx);
            if best.as_ref().map_or(true, |b| component.len() > b.len()) {
                best = Some(component);
            }
        }
    }
    let component = best.ok_or(Error::NoForeground)?;

    let hull = monotone_chain(&component);
    let mut mask_bitmap = vec![false; PATCH_AREA];
    let min_r = hull.iter().map(|p| p.0).min().unwrap();
    let max_r = hull.iter().map(|p| p.0).max().unwrap();
    let min_c = hull.iter().map(|p| p.1).min().unwrap();
    let max_c = hull.iter().map(|p| p.1).max().unwrap();
    let mut sum_r = 0.0f64;
    let mut sum_c = 0.0f64;
    let mut count = 0usize;
    for r in min_r..=max_r {
        for c in min_c..=max_c {
            if hull_contains(&hull, (r, c)) {
                mask_bitmap[r as usize * PATCH_SIZE + c as usize] = true;
                sum_r += r as f64;
                sum_c += c as f64;
                count += 1;
            }
        }
    }
    debug_assert!(count > 0);
    Ok(NucleusMask {
        bitmap: mask_bitmap,
        hull,
        centroid: (sum_r / count as f64, sum_c / count as f64),
    })
}
