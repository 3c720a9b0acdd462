//! Piecewise-linear scalar fields on the grid torus.
//!
//! Vertex values are compared with the symbolic perturbation
//! `(value, vertex id)`, which makes the field combinatorially Morse with
//! distinct critical values. Every real-valued output uses the unperturbed
//! values.

use std::cmp::Ordering;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{area_and_integral, Corner};
use crate::grid::{TorusGrid, LINK};
use crate::lattice::LatticeSymplectomorphism;
use crate::surface::SubSurface;

pub const RASTER_MAGIC: &[u8; 4] = b"TQS1";

/// Input for [`TorusField::build`].
#[derive(Debug, Clone)]
pub enum FieldSource<'a> {
    Expr(&'a str),
    /// `n²` values in raster order (`i` fastest).
    Raster(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalKind {
    Minimum,
    Maximum,
    /// Lower link with `k ≥ 2` arcs (a `k`-fold saddle).
    Saddle(usize),
}

impl TorusField {
    pub fn build(n: usize, source: FieldSource<'_>) -> Result<Self> {
        let grid = TorusGrid::new(n)?;
        let values = match source {
            FieldSource::Expr(src) => {
                let expr = Expr::parse(src)?;
                let mut values = vec![0.0; n * n];
                for (v, slot) in values.iter_mut().enumerate() {
                    let (i, j) = grid.coords(v);
                    *slot = expr.eval(i as f64 / n as f64, j as f64 / n as f64);
                }
                values
            }
            FieldSource::Raster(data) => {
                if data.len() != n * n {
                    return Err(Error::Raster(format!(
                        "expected {} values, got {}",
                        n * n,
                        data.len()
                    )));
                }
                let mut values = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        values[i * n + j] = data[j * n + i];
                    }
                }
                values
            }
        };
        Self::from_values(grid, values)
    }

    /// Wraps vertex values indexed by vertex id (`i·n + j`).
    pub fn from_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.vertex_count() {
            return Err(Error::GridMismatch {
                expected: grid.n(),
                actual: (values.len() as f64).sqrt() as usize,
            });
        }
        if let Some(v) = values.iter().position(|x| !x.is_finite()) {
            let (i, j) = grid.coords(v);
            return Err(Error::NonFinite { i: i as usize, j: j as usize });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let n = grid.n() as f64;
        let values = (0..grid.vertex_count())
            .map(|v| {
                let (i, j) = grid.coords(v);
                f(i as f64 / n, j as f64 / n)
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::from_values(grid, vec![c; grid.vertex_count()])
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Perturbed comparison: a strict total order on vertices.
    #[inline]
    pub fn compare(&self, a: usize, b: usize) -> Ordering {
        self.values[a].total_cmp(&self.values[b]).then(a.cmp(&b))
    }

    #[inline]
    pub fn below(&self, a: usize, b: usize) -> bool {
        self.compare(a, b) == Ordering::Less
    }

    /// Vertices in increasing perturbed order.
    pub fn sorted_vertices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_unstable_by(|&a, &b| self.compare(a, b));
        order
    }

    /// Vertex values sorted ascending (unperturbed).
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut vals = self.values.clone();
        vals.sort_unstable_by(f64::total_cmp);
        vals
    }

    /// Pointwise map of the vertex values.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_with(&self, other: &TorusField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_grid(other.grid.n())?;
        Self::from_values(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub(crate) fn check_grid(&self, n: usize) -> Result<()> {
        if n != self.grid.n() {
            return Err(Error::GridMismatch { expected: self.grid.n(), actual: n });
        }
        Ok(())
    }

    pub(crate) fn triangle_corners(&self, t: usize) -> [Corner; 3] {
        let pos = self.grid.triangle_positions(t);
        let verts = self.grid.triangle_vertices(t);
        [0, 1, 2].map(|k| Corner { x: pos[k].0, y: pos[k].1, h: self.values[verts[k]] })
    }

    /// Exact integral of the PL interpolant over the whole torus.
    pub fn integral(&self) -> f64 {
        // Each vertex lies in six triangles: ∫ = Σ_T |T|·mean(T) = Σ_v h_v / n².
        let n2 = self.grid.vertex_count() as f64;
        neumaier_sum(&self.values) / n2
    }

    /// Exact integral of the PL interpolant over a subsurface.
    pub fn integrate(&self, region: &SubSurface) -> Result<f64> {
        self.check_grid(region.grid().n())?;
        let scale = 1.0 / (self.grid.vertex_count() as f64);
        let mut total = 0.0;
        for t in 0..self.grid.triangle_count() {
            let corners = self.triangle_corners(t);
            let poly = region.piece(t, &corners);
            total += area_and_integral(&poly).1;
        }
        Ok(total * scale)
    }

    /// `H ∘ φ⁻¹`: the value at `φ(x)` becomes the old value at `x`.
    pub fn apply_map(&self, phi: &LatticeSymplectomorphism) -> Result<Self> {
        phi.validate()?;
        let mut out = vec![0.0; self.values.len()];
        for (v, &h) in self.values.iter().enumerate() {
            out[phi.apply_vertex(&self.grid, v)] = h;
        }
        Self::from_values(self.grid, out)
    }

    /// The closed sublevel set `{H ≤ t}` for a regular value `t`.
    pub fn sublevel(&self, t: f64) -> Result<SubSurface> {
        SubSurface::from_levels(self.grid, &self.values, t)
    }

    /// Number of lower and upper arcs in the link of `v`.
    pub fn link_arcs(&self, v: usize) -> (usize, usize) {
        let lower: [bool; 6] = LINK.map(|off| self.below(self.grid.neighbor(v, off), v));
        let changes = (0..6).filter(|&k| lower[k] != lower[(k + 1) % 6]).count();
        let n_lower = lower.iter().filter(|&&b| b).count();
        match n_lower {
            0 => (0, 1),
            6 => (1, 0),
            _ => (changes / 2, changes / 2),
        }
    }

    pub fn classify_vertex(&self, v: usize) -> Option<CriticalKind> {
        match self.link_arcs(v) {
            (0, _) => Some(CriticalKind::Minimum),
            (_, 0) => Some(CriticalKind::Maximum),
            (1, 1) => None,
            (k, _) => Some(CriticalKind::Saddle(k)),
        }
    }

    /// PL critical vertices by link analysis, in vertex-id order.
    pub fn critical_vertices(&self) -> Vec<(usize, CriticalKind)> {
        (0..self.values.len())
            .filter_map(|v| self.classify_vertex(v).map(|k| (v, k)))
            .collect()
    }

    /// Distinct unperturbed critical values, ascending.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> =
            self.critical_vertices().into_iter().map(|(v, _)| self.values[v]).collect();
        vals.sort_unstable_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    /// Values in raster order (`i` fastest).
    pub fn raster(&self) -> Vec<f64> {
        let n = self.grid.n();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.values[i * n + j];
            }
        }
        out
    }

    pub fn write_raster<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(RASTER_MAGIC)?;
        w.write_all(&(self.grid.n() as u32).to_le_bytes())?;
        w.write_all(&[0u8; 8])?;
        for x in self.raster() {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_raster<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|e| Error::Raster(format!("header: {e}")))?;
        if &header[..4] != RASTER_MAGIC {
            return Err(Error::Raster("bad magic".into()));
        }
        let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
        if header[8..].iter().any(|&b| b != 0) {
            return Err(Error::Raster("reserved header bytes are not zero".into()));
        }
        TorusGrid::new(n)?;
        let mut body = Vec::new();
        r.read_to_end(&mut body).map_err(|e| Error::Raster(format!("body: {e}")))?;
        if body.len() != 8 * n * n {
            return Err(Error::Raster(format!(
                "expected {} payload bytes, got {}",
                8 * n * n,
                body.len()
            )));
        }
        let data: Vec<f64> =
            body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::build(n, FieldSource::Raster(&data))
    }
}

/// Compensated sum, so that constant fields integrate to their value.
fn neumaier_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn field(n: usize, src: &str) -> TorusField {
        TorusField::build(n, FieldSource::Expr(src)).unwrap()
    }

    #[test]
    fn build_evaluates_expression_at_vertices() {
        let f = field(64, "cos(2*pi*q)");
        for v in [0, 5, 100, 4095] {
            let (_, j) = f.grid().coords(v);
            assert_eq!(f.value(v), (2.0 * PI * j as f64 / 64.0).cos());
        }
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            TorusField::build(4, FieldSource::Expr("1")).unwrap_err(),
            Error::Resolution(4)
        );
        let mut data = vec![0.0; 64];
        data[9] = f64::NAN;
        assert_eq!(
            TorusField::build(8, FieldSource::Raster(&data)).unwrap_err(),
            Error::NonFinite { i: 1, j: 1 }
        );
        assert!(TorusField::build(8, FieldSource::Expr("1/0")).is_err());
    }

    #[test]
    fn constant_raster_is_strictly_ordered() {
        let f = TorusField::build(8, FieldSource::Raster(&[0.0; 64])).unwrap();
        let order = f.sorted_vertices();
        for w in order.windows(2) {
            assert_eq!(f.compare(w[0], w[1]), Ordering::Less);
        }
        assert_eq!(order, (0..64).collect::<Vec<_>>());
    }

    #[test]
    fn raster_order_is_i_fastest() {
        let n = 8;
        let data: Vec<f64> = (0..n * n).map(|k| k as f64).collect();
        let f = TorusField::build(n, FieldSource::Raster(&data)).unwrap();
        let g = f.grid();
        assert_eq!(f.value(g.vertex(1, 0)), 1.0);
        assert_eq!(f.value(g.vertex(0, 1)), 8.0);
        assert_eq!(f.raster(), data);
    }

    #[test]
    fn raster_file_round_trip_and_header() {
        let f = field(8, "sin(2*pi*p)*cos(2*pi*q)");
        let mut buf = Vec::new();
        f.write_raster(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"TQS1");
        assert_eq!(&buf[4..8], &8u32.to_le_bytes());
        assert_eq!(&buf[8..16], &[0u8; 8]);
        assert_eq!(buf.len(), 16 + 8 * 64);
        assert_eq!(TorusField::read_raster(&buf[..]).unwrap(), f);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(TorusField::read_raster(&bad[..]).is_err());
        let mut bad = buf.clone();
        bad[10] = 1;
        assert!(TorusField::read_raster(&bad[..]).is_err());
        assert!(TorusField::read_raster(&buf[..100]).is_err());
    }

    #[test]
    fn integral_normalization_and_symmetry() {
        let c = TorusField::constant(TorusGrid::new(16).unwrap(), 0.37).unwrap();
        assert!((c.integral() - 0.37).abs() < 1e-15);
        assert!(field(64, "sin(2*pi*q)").integral().abs() < 1e-12);
        assert!(field(64, "cos(2*pi*q)+0.5*cos(2*pi*p)").integral().abs() < 1e-12);
    }

    #[test]
    fn integrate_over_whole_torus_matches_integral() {
        let f = field(16, "cos(2*pi*q)+0.5*sin(2*pi*(p+q))+0.3");
        let whole = SubSurface::whole(*f.grid());
        assert!((f.integrate(&whole).unwrap() - f.integral()).abs() < 1e-14);
        let empty = SubSurface::empty(*f.grid());
        assert_eq!(f.integrate(&empty).unwrap(), 0.0);
        let other = SubSurface::whole(TorusGrid::new(8).unwrap());
        assert!(matches!(f.integrate(&other), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn apply_map_examples() {
        let id = LatticeSymplectomorphism::identity();
        let f = field(32, "cos(2*pi*q)+0.5*sin(2*pi*p)");
        assert_eq!(f.apply_map(&id).unwrap(), f);

        let shear = LatticeSymplectomorphism::new([[1, 1], [0, 1]], (0, 0)).unwrap();
        let g = field(32, "cos(2*pi*q)");
        assert_eq!(g.apply_map(&shear).unwrap(), g);

        let half = LatticeSymplectomorphism::translation(16, 0);
        let h = field(32, "cos(2*pi*p)").apply_map(&half).unwrap();
        let expected = field(32, "-cos(2*pi*p)");
        for v in 0..h.values().len() {
            assert!((h.value(v) - expected.value(v)).abs() < 1e-12);
        }

        let bad = LatticeSymplectomorphism { matrix: [[2, 0], [0, 1]], translation: (0, 0) };
        assert!(matches!(f.apply_map(&bad), Err(Error::NotUnimodular(..))));
    }

    #[test]
    fn critical_points_of_two_mode_field() {
        let f = field(128, "cos(2*pi*q)+0.5*cos(2*pi*p)");
        let crit = f.critical_vertices();
        assert_eq!(crit.len(), 4, "{crit:?}");
        let mut found: Vec<((i64, i64), CriticalKind)> =
            crit.iter().map(|&(v, k)| (f.grid().coords(v), k)).collect();
        found.sort_by_key(|x| x.0);
        assert_eq!(
            found,
            vec![
                ((0, 0), CriticalKind::Maximum),
                ((0, 64), CriticalKind::Saddle(2)),
                ((64, 0), CriticalKind::Saddle(2)),
                ((64, 64), CriticalKind::Minimum),
            ]
        );
    }

    #[test]
    fn sublevel_requires_regular_value() {
        let f = field(16, "sin(2*pi*q)");
        assert_eq!(f.sublevel(0.0).unwrap_err(), Error::IrregularLevel(0.0));
        assert!(f.sublevel(1e-9).is_ok());
    }

    #[test]
    fn constant_integrates_to_itself() {
        for n in [8, 64, 100, 256] {
            for c in [0.7, 0.1, -3.3, 1e-7, 123.456] {
                let f = TorusField::constant(TorusGrid::new(n).unwrap(), c).unwrap();
                assert_eq!(f.integral(), c, "n = {n}");
            }
        }
    }
}
