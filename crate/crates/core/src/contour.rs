//! Marching squares over a rectangular scalar field.
//!
//! The field is row-major with `nx` columns and `ny` rows. A point is inside
//! when its value is `<= threshold`. Non-finite values (masked points) are
//! always outside. Crossings are placed by linear interpolation along cell
//! edges, or at the edge midpoint when an endpoint is masked. Results are in
//! fractional index coordinates `(column, row)`.

use alloc::vec;
use alloc::vec::Vec;

/// A chain of edge crossings. Closed chains do not repeat their first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

const NONE: usize = usize::MAX;

// edges within a cell: 0 bottom, 1 right, 2 top, 3 left
const BOTTOM: u8 = 0;
const RIGHT: u8 = 1;
const TOP: u8 = 2;
const LEFT: u8 = 3;

struct Field<'a> {
    values: &'a [f64],
    nx: usize,
    threshold: f64,
}

impl Field<'_> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    #[inline]
    fn inside(&self, i: usize, j: usize) -> bool {
        let v = self.at(i, j);
        v.is_finite() && v <= self.threshold
    }

    /// Global id of a cell edge.
    fn edge_id(&self, i: usize, j: usize, edge: u8) -> usize {
        let (ci, cj, vertical) = match edge {
            BOTTOM => (i, j, 0),
            TOP => (i, j + 1, 0),
            LEFT => (i, j, 1),
            _ => (i + 1, j, 1),
        };
        2 * (cj * self.nx + ci) + vertical
    }

    fn crossing(&self, id: usize) -> (f64, f64) {
        let vertical = id & 1 == 1;
        let base = id / 2;
        let (i, j) = (base % self.nx, base / self.nx);
        let (a, b) = if vertical { (self.at(i, j), self.at(i, j + 1)) } else { (self.at(i, j), self.at(i + 1, j)) };
        let t = if a.is_finite() && b.is_finite() && a != b {
            ((self.threshold - a) / (b - a)).clamp(0.0, 1.0)
        } else {
            0.5
        };
        if vertical {
            (i as f64, j as f64 + t)
        } else {
            (i as f64 + t, j as f64)
        }
    }
}

fn cell_segments(case: u8, center_inside: bool) -> &'static [(u8, u8)] {
    match case {
        1 | 14 => &[(LEFT, BOTTOM)],
        2 | 13 => &[(BOTTOM, RIGHT)],
        3 | 12 => &[(LEFT, RIGHT)],
        4 | 11 => &[(RIGHT, TOP)],
        6 | 9 => &[(BOTTOM, TOP)],
        7 | 8 => &[(LEFT, TOP)],
        // saddles: bottom-left and top-right inside
        5 if center_inside => &[(BOTTOM, RIGHT), (TOP, LEFT)],
        5 => &[(LEFT, BOTTOM), (RIGHT, TOP)],
        // bottom-right and top-left inside
        10 if center_inside => &[(LEFT, BOTTOM), (RIGHT, TOP)],
        10 => &[(BOTTOM, RIGHT), (TOP, LEFT)],
        _ => &[],
    }
}

/// Boundary chains of `{ value <= threshold }`.
pub fn march(values: &[f64], nx: usize, ny: usize, threshold: f64) -> Vec<Chain> {
    assert_eq!(values.len(), nx * ny, "field size mismatch");
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let field = Field { values, nx, threshold };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let case = field.inside(i, j) as u8
                | (field.inside(i + 1, j) as u8) << 1
                | (field.inside(i + 1, j + 1) as u8) << 2
                | (field.inside(i, j + 1) as u8) << 3;
            if case == 0 || case == 15 {
                continue;
            }
            let center = 0.25
                * (field.at(i, j) + field.at(i + 1, j) + field.at(i + 1, j + 1) + field.at(i, j + 1));
            let center_inside = center.is_finite() && center <= threshold;
            for &(a, b) in cell_segments(case, center_inside) {
                segments.push((field.edge_id(i, j, a), field.edge_id(i, j, b)));
            }
        }
    }

    // each edge is shared by at most two segments
    let mut incident = vec![[NONE; 2]; 2 * nx * ny];
    for (s, &(a, b)) in segments.iter().enumerate() {
        for e in [a, b] {
            let slot = &mut incident[e];
            if slot[0] == NONE {
                slot[0] = s;
            } else {
                slot[1] = s;
            }
        }
    }

    let degree = |e: usize| incident[e].iter().filter(|&&s| s != NONE).count();
    let mut visited = vec![false; segments.len()];
    let mut chains = Vec::new();

    let walk = |start: usize, from: usize, visited: &mut Vec<bool>| {
        let mut ids = vec![from];
        let mut seg = start;
        let mut at = from;
        loop {
            visited[seg] = true;
            let (a, b) = segments[seg];
            at = if a == at { b } else { a };
            ids.push(at);
            match incident[at].iter().copied().find(|&s| s != NONE && !visited[s]) {
                Some(next) => seg = next,
                None => break,
            }
        }
        let closed = ids.len() > 2 && ids.first() == ids.last();
        if closed {
            ids.pop();
        }
        Chain { points: ids.into_iter().map(|e| field.crossing(e)).collect(), closed }
    };

    // open chains first, from their dangling ends
    for s in 0..segments.len() {
        if visited[s] {
            continue;
        }
        let (a, b) = segments[s];
        if degree(a) == 1 {
            chains.push(walk(s, a, &mut visited));
        } else if degree(b) == 1 {
            chains.push(walk(s, b, &mut visited));
        }
    }
    for s in 0..segments.len() {
        if !visited[s] {
            chains.push(walk(s, segments[s].0, &mut visited));
        }
    }
    chains
}
