//! Exact area and integral of linear data over convex polygons.

/// Polygon corner carrying a value of a function that is linear on the
/// polygon. Coordinates are in grid units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Corner {
    pub fn lerp(a: Corner, b: Corner, f: f64) -> Corner {
        Corner {
            x: a.x + f * (b.x - a.x),
            y: a.y + f * (b.y - a.y),
            h: a.h + f * (b.h - a.h),
        }
    }
}

/// Area (grid units²) and integral of the linear function over a convex
/// polygon given counter-clockwise.
pub fn area_and_integral(poly: &[Corner]) -> (f64, f64) {
    if poly.len() < 3 {
        return (0.0, 0.0);
    }
    let o = poly[0];
    let mut area = 0.0;
    let mut integral = 0.0;
    for w in poly[1..].windows(2) {
        let (a, b) = (w[0], w[1]);
        let tri = 0.5 * ((a.x - o.x) * (b.y - o.y) - (b.x - o.x) * (a.y - o.y));
        area += tri;
        integral += tri * (o.h + a.h + b.h) / 3.0;
    }
    (area, integral)
}

/// Keeps the part of the polygon where `h ≤ level` (or `h ≥ level` when
/// `keep_below` is false).
pub fn clip(poly: &[Corner], level: f64, keep_below: bool) -> Vec<Corner> {
    let inside = |c: &Corner| if keep_below { c.h <= level } else { c.h >= level };
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let f = (level - a.h) / (b.h - a.h);
            out.push(Corner::lerp(a, b, f));
        }
    }
    out
}

/// Area and integral over the band `lo ≤ h ≤ hi` of a triangle.
pub fn band(tri: &[Corner; 3], lo: f64, hi: f64) -> (f64, f64) {
    let hmin = tri.iter().map(|c| c.h).fold(f64::INFINITY, f64::min);
    let hmax = tri.iter().map(|c| c.h).fold(f64::NEG_INFINITY, f64::max);
    if hi <= hmin || lo >= hmax || hi <= lo {
        return (0.0, 0.0);
    }
    let mut poly = tri.to_vec();
    if lo > hmin {
        poly = clip(&poly, lo, false);
    }
    if hi < hmax {
        poly = clip(&poly, hi, true);
    }
    area_and_integral(&poly)
}
