//! Seeded property batteries for ζ and τ.
//!
//! Every case draws its inputs from a ChaCha stream keyed by the case seed
//! recorded in the report, so a failure can be replayed on its own.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::TorusField;
use crate::generate::TrigPolynomial;
use crate::grid::TorusGrid;
use crate::lattice::LatticeSymplectomorphism;
use crate::quasistate::{zeta_reeb, DEFAULT_TOLERANCE};
use crate::reeb::ReebGraph;
use crate::surface::SubSurface;

/// Lipschitz cap for random reparametrizations.
pub const MAX_LIPSCHITZ: f64 = 10.0;
/// Breakpoint cap for random reparametrizations.
pub const MAX_BREAKPOINTS: usize = 8;
/// Tolerance of the topological-measure checks.
pub const TAU_TOLERANCE: f64 = 1e-9;
/// Tolerance of exact symplectic invariance.
pub const INVARIANCE_TOLERANCE: f64 = 1e-9;
/// Tolerance of exact annulus values.
pub const ANNULUS_TOLERANCE: f64 = 1e-12;
/// Largest disk measure used for bump supports.
pub const MAX_DISK_MEASURE: f64 = 0.3;
/// Steepest slope of the random fields fed to the ζ batteries, that of
/// `sin(2πq)`.
pub const FIELD_SLOPE: f64 = 2.0 * PI;

/// Continuous piecewise-linear `φ : ℝ → ℝ`, constant beyond its end
/// breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLReparam {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl PLReparam {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Data("reparametrization needs matching, non-empty knots".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data("reparametrization breakpoints must increase".into()));
        }
        if breakpoints.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::Data("reparametrization knots must be finite".into()));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn identity(lo: f64, hi: f64) -> Self {
        Self { breakpoints: vec![lo, hi], values: vec![lo, hi] }
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Self {
        Self { breakpoints: vec![lo, hi], values: vec![c, c] }
    }

    /// `2..=MAX_BREAKPOINTS` knots spanning `[lo, hi]`, slopes uniform in
    /// `[-lipschitz, lipschitz]`.
    pub fn random(rng: &mut impl Rng, lo: f64, hi: f64, lipschitz: f64) -> Self {
        let k = rng.gen_range(2..=MAX_BREAKPOINTS);
        let mut inner: Vec<f64> = (0..k - 2).map(|_| rng.gen_range(lo..hi)).collect();
        inner.sort_by(f64::total_cmp);
        let mut breakpoints = vec![lo];
        for x in inner {
            if x > *breakpoints.last().unwrap() && x < hi {
                breakpoints.push(x);
            }
        }
        breakpoints.push(hi);
        let mut values = vec![rng.gen_range(-1.0..=1.0)];
        for w in breakpoints.windows(2) {
            let slope = rng.gen_range(-lipschitz..=lipschitz);
            values.push(values.last().unwrap() + slope * (w[1] - w[0]));
        }
        Self { breakpoints, values }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if x <= b[0] {
            return self.values[0];
        }
        if x >= b[b.len() - 1] {
            return self.values[b.len() - 1];
        }
        let k = b.partition_point(|&y| y <= x);
        let f = (x - b[k - 1]) / (b[k] - b[k - 1]);
        self.values[k - 1] + f * (self.values[k] - self.values[k - 1])
    }

    pub fn lipschitz(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(b, v)| ((v[1] - v[0]) / (b[1] - b[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Pointwise sum, on the union of both knot sets.
    pub fn add(&self, other: &PLReparam) -> PLReparam {
        let mut knots: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let values = knots.iter().map(|&x| self.eval(x) + other.eval(x)).collect();
        PLReparam { breakpoints: knots, values }
    }

    pub fn scaled(&self, a: f64) -> PLReparam {
        PLReparam { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(|v| a * v).collect() }
    }

    /// `φ ∘ H` on the vertices.
    pub fn compose(&self, field: &TorusField) -> Result<TorusField> {
        field.map_values(|h| self.eval(h))
    }
}

/// Annulus between two parallel closed geodesics of slope `(k, l)`.
///
/// With `u = l·p − k·q (mod 1)` constant along the slope, the annulus is
/// `offset ≤ u ≤ offset + width`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearAnnulus {
    pub slope: (i64, i64),
    pub offset: f64,
    pub width: f64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl LinearAnnulus {
    pub fn new(slope: (i64, i64), offset: f64, width: f64) -> Result<Self> {
        if gcd(slope.0, slope.1) != 1 {
            return Err(Error::Data(format!("slope {slope:?} is not a primitive vector")));
        }
        if !(width > 0.0 && width < 1.0) || !offset.is_finite() {
            return Err(Error::Data(format!("annulus width {width} outside (0, 1)")));
        }
        Ok(Self { slope, offset: offset.rem_euclid(1.0), width })
    }

    /// Grid-aligned placement: boundaries half a transverse step off the
    /// vertex lines starting at step `m`.
    pub fn aligned(slope: (i64, i64), n: usize, m: i64, width: f64) -> Result<Self> {
        Self::new(slope, (m as f64 + 0.5) / n as f64, width)
    }

    /// Same annulus moved by `s` across its slope.
    pub fn shifted(&self, s: f64) -> Self {
        Self { offset: (self.offset + s).rem_euclid(1.0), ..*self }
    }

    /// Sublevel set of the transverse distance to the mid-line. That
    /// distance is affine on every triangle the boundary crosses, so the
    /// boundary is exactly straight.
    pub fn subsurface(&self, grid: TorusGrid) -> Result<SubSurface> {
        let n = grid.n() as f64;
        let (k, l) = self.slope;
        let span = k.abs().max(l.abs()).max((l - k).abs()) as f64;
        let half = 0.5 * self.width * n;
        if half <= span || 0.5 * n - half <= span {
            return Err(Error::Data(format!(
                "annulus width {} too close to 0 or 1 for slope {:?} at n = {}",
                self.width, self.slope, grid.n()
            )));
        }
        let centre = (self.offset + 0.5 * self.width) * n;
        let values: Vec<f64> = (0..grid.vertex_count())
            .map(|v| {
                let (i, j) = grid.coords(v);
                let u = (l * i - k * j) as f64;
                let d = (u - centre).rem_euclid(n);
                d.min(n - d)
            })
            .collect();
        SubSurface::from_levels(grid, &values, half)
    }
}

/// Torus distance in `(p, q)` from each vertex to `centre`.
fn distance_field(grid: TorusGrid, centre: [f64; 2]) -> Vec<f64> {
    let n = grid.n() as f64;
    (0..grid.vertex_count())
        .map(|v| {
            let (i, j) = grid.coords(v);
            let dp = (i as f64 / n - centre[0]).rem_euclid(1.0);
            let dq = (j as f64 / n - centre[1]).rem_euclid(1.0);
            let (dp, dq) = (dp.min(1.0 - dp), dq.min(1.0 - dq));
            (dp * dp + dq * dq).sqrt()
        })
        .collect()
}

/// Members of the random subsurface family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSpec {
    Disk { centre: [f64; 2], radius: f64 },
    Annulus(LinearAnnulus),
    Complement(Box<SurfaceSpec>),
    Union(Box<SurfaceSpec>, Box<SurfaceSpec>),
}

const SLOPES: [(i64, i64); 6] = [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2)];

impl SurfaceSpec {
    pub fn build(&self, grid: TorusGrid) -> Result<SubSurface> {
        match self {
            SurfaceSpec::Disk { centre, radius } => {
                SubSurface::from_levels(grid, &distance_field(grid, *centre), *radius)
            }
            SurfaceSpec::Annulus(a) => a.subsurface(grid),
            SurfaceSpec::Complement(s) => Ok(s.build(grid)?.complement()),
            SurfaceSpec::Union(a, b) => a.build(grid)?.union_disjoint(&b.build(grid)?),
        }
    }

    /// Moves every boundary inward by `delta` (torus units).
    pub fn shrink(&self, delta: f64) -> Self {
        match self {
            SurfaceSpec::Disk { centre, radius } => {
                SurfaceSpec::Disk { centre: *centre, radius: radius - delta }
            }
            SurfaceSpec::Annulus(a) => {
                let (k, l) = a.slope;
                // transverse coordinate scaled by |(k, l)|
                let d = delta * ((k * k + l * l) as f64).sqrt();
                SurfaceSpec::Annulus(LinearAnnulus { offset: a.offset + d, width: a.width - 2.0 * d, ..*a })
            }
            SurfaceSpec::Complement(s) => SurfaceSpec::Complement(Box::new(s.shrink(-delta))),
            SurfaceSpec::Union(a, b) => SurfaceSpec::Union(Box::new(a.shrink(delta)), Box::new(b.shrink(delta))),
        }
    }

    pub fn random_disk(rng: &mut impl Rng) -> Self {
        let max_r = (MAX_DISK_MEASURE / PI).sqrt();
        SurfaceSpec::Disk {
            centre: [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
            radius: rng.gen_range(0.04..max_r),
        }
    }

    pub fn random_annulus(rng: &mut impl Rng) -> Self {
        let slope = SLOPES[rng.gen_range(0..SLOPES.len())];
        let width = rng.gen_range(0.15..0.6);
        SurfaceSpec::Annulus(LinearAnnulus { slope, offset: rng.gen_range(0.0..1.0), width })
    }

    /// Disks, annuli, their complements and disjoint unions.
    pub fn random(rng: &mut impl Rng, grid: TorusGrid) -> Result<Self> {
        let base = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.5) {
                Self::random_disk(rng)
            } else {
                Self::random_annulus(rng)
            }
        };
        let mut local = ChaCha8Rng::seed_from_u64(rng.gen());
        let spec = match local.gen_range(0..4) {
            0 | 1 => base(&mut local),
            2 => SurfaceSpec::Complement(Box::new(base(&mut local))),
            _ => {
                let a = base(&mut local);
                Self::random_disjoint_partner(&mut local, grid, &a)?
                    .map(|b| SurfaceSpec::Union(Box::new(a.clone()), Box::new(b)))
                    .unwrap_or(a)
            }
        };
        Ok(spec)
    }

    /// A disk disjoint from `self`, if one turns up within a few draws.
    pub fn random_disjoint_partner(
        rng: &mut impl Rng,
        grid: TorusGrid,
        other: &SurfaceSpec,
    ) -> Result<Option<SurfaceSpec>> {
        let w = other.build(grid)?;
        for _ in 0..16 {
            let mut d = Self::random_disk(rng);
            if let SurfaceSpec::Disk { radius, .. } = &mut d {
                *radius *= 0.5;
            }
            if d.build(grid)?.is_disjoint(&w) {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }
}

/// Compactly supported bump inside a disk: `a·(1 − s²)²·shape` with
/// `s = d/r` and `shape` either 1 or a sign-changing factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub centre: [f64; 2],
    pub radius: f64,
    pub amplitude: f64,
    pub mixed: bool,
}

impl Bump {
    pub fn random(rng: &mut impl Rng) -> Self {
        let max_r = (MAX_DISK_MEASURE / PI).sqrt();
        let sign = match rng.gen_range(0..3) {
            0 => 1.0,
            1 => -1.0,
            _ => 0.0,
        };
        Bump {
            centre: [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
            radius: rng.gen_range(0.05..max_r),
            amplitude: if sign == 0.0 { rng.gen_range(-2.0..2.0) } else { sign * rng.gen_range(0.1..2.0) },
            mixed: sign == 0.0,
        }
    }

    pub fn field(&self, grid: TorusGrid) -> Result<TorusField> {
        let n = grid.n() as f64;
        let c = self.centre;
        let values = (0..grid.vertex_count())
            .map(|v| {
                let (i, j) = grid.coords(v);
                let dp = (i as f64 / n - c[0] + 0.5).rem_euclid(1.0) - 0.5;
                let dq = (j as f64 / n - c[1] + 0.5).rem_euclid(1.0) - 0.5;
                let s2 = (dp * dp + dq * dq) / (self.radius * self.radius);
                if s2 >= 1.0 {
                    return 0.0;
                }
                let shape = if self.mixed { (PI * dp / self.radius).sin() + 0.3 } else { 1.0 };
                self.amplitude * (1.0 - s2).powi(2) * shape
            })
            .collect();
        TorusField::from_values(grid, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `|lhs − rhs| ≤ tol`
    Eq,
    /// `lhs ≤ rhs + tol`
    Le,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub property: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
    pub relation: Relation,
}

impl Check {
    pub fn eq(property: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { property: property.into(), lhs, rhs, tol, relation: Relation::Eq }
    }

    pub fn le(property: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        Self { property: property.into(), lhs, rhs, tol, relation: Relation::Le }
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::Eq => (self.lhs - self.rhs).abs() <= self.tol,
            Relation::Le => self.lhs <= self.rhs + self.tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub seed: u64,
    pub property: String,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryReport {
    pub battery: Battery,
    pub n: usize,
    pub seed: u64,
    pub cases: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    Normalization,
    Positivity,
    Monotone,
    Quasilinear,
    TauAxioms,
    Annulus,
    DiskVanishing,
    Symplectic,
    Topology,
}

impl Battery {
    pub const ALL: [Battery; 9] = [
        Battery::Normalization,
        Battery::Positivity,
        Battery::Monotone,
        Battery::Quasilinear,
        Battery::TauAxioms,
        Battery::Annulus,
        Battery::DiskVanishing,
        Battery::Symplectic,
        Battery::Topology,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Battery::Normalization => "normalization",
            Battery::Positivity => "positivity",
            Battery::Monotone => "monotone",
            Battery::Quasilinear => "quasilinear",
            Battery::TauAxioms => "tau-axioms",
            Battery::Annulus => "annulus",
            Battery::DiskVanishing => "disk-vanishing",
            Battery::Symplectic => "symplectic",
            Battery::Topology => "topology",
        }
    }
}

impl fmt::Display for Battery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Data(format!("unknown battery {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryConfig {
    pub n: usize,
    pub seed: u64,
    pub count: usize,
    /// Tolerance of the ζ checks.
    pub tolerance: f64,
}

impl BatteryConfig {
    pub fn new(n: usize, seed: u64, count: usize) -> Self {
        Self { n, seed, count, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Seed of case `i` in a battery seeded with `seed`.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Steepest edge slope of the PL field, `max |ΔH| / |edge|`.
pub fn max_edge_slope(field: &TorusField) -> f64 {
    let grid = field.grid();
    let n = grid.n() as f64;
    let h = field.values();
    grid.cells()
        .flat_map(|[v, r, d, u]| {
            [(h[r] - h[v]).abs() * n, (h[u] - h[v]).abs() * n, (h[d] - h[v]).abs() * n / 2f64.sqrt()]
        })
        .fold(0.0, f64::max)
}

/// A random trigonometric field of degree 1 or 2, rescaled so its steepest
/// edge slope is `FIELD_SLOPE`.
pub fn random_field(rng: &mut impl Rng, grid: TorusGrid) -> Result<(TrigPolynomial, TorusField)> {
    let degree = rng.gen_range(1..=2);
    let poly = TrigPolynomial::random(rng.gen(), degree, false);
    let slope = max_edge_slope(&poly.field(grid.n())?);
    let poly = poly.scaled(FIELD_SLOPE / slope);
    let field = poly.field(grid.n())?;
    Ok((poly, field))
}

/// The PL error of `ζ(φ ∘ H)` grows with `Lip(φ)`, so `tol` is taken per
/// unit Lipschitz constant.
pub fn check_quasilinearity(
    field: &TorusField,
    phi: &PLReparam,
    psi: &PLReparam,
    scale: f64,
    tol: f64,
) -> Result<Vec<Check>> {
    let zphi = zeta_reeb(&phi.compose(field)?)?;
    let zpsi = zeta_reeb(&psi.compose(field)?)?;
    let zsum = zeta_reeb(&phi.add(psi).compose(field)?)?;
    let zscaled = zeta_reeb(&phi.scaled(scale).compose(field)?)?;
    let lip = phi.lipschitz() + psi.lipschitz();
    Ok(vec![
        Check::eq("additivity on C(H)", zphi + zpsi, zsum, tol * lip.max(1.0)),
        Check::eq("homogeneity on C(H)", zscaled, scale * zphi, tol * (scale.abs() * phi.lipschitz()).max(1.0)),
    ])
}

/// Requires `a ≤ b` at every vertex.
pub fn check_monotone(a: &TorusField, b: &TorusField, tol: f64) -> Result<Check> {
    if a.values().iter().zip(b.values()).any(|(x, y)| x > y) {
        return Err(Error::Data("monotonicity check needs a ≤ b vertexwise".into()));
    }
    Ok(Check::le("monotonicity", zeta_reeb(a)?, zeta_reeb(b)?, tol))
}

pub fn check_symplectic_invariance(
    field: &TorusField,
    maps: &[LatticeSymplectomorphism],
    tol: f64,
) -> Result<Vec<Check>> {
    let base = zeta_reeb(field)?;
    maps.iter()
        .map(|phi| Ok(Check::eq("symplectic invariance", zeta_reeb(&field.apply_map(phi)?)?, base, tol)))
        .collect()
}

/// Axioms of τ on one subsurface and a disjoint partner.
pub fn check_tau_axioms_on(grid: TorusGrid, spec: &SurfaceSpec, partner: Option<&SurfaceSpec>) -> Result<Vec<Check>> {
    let tol = TAU_TOLERANCE;
    let w = spec.build(grid)?;
    let reg = w.regularize()?;
    let tau = reg.region.measure();
    let mut checks = vec![
        Check::eq("complement", tau + w.complement().tau()?, 1.0, tol),
        Check::le("range", 0.0, tau, tol),
        Check::le("range", tau, 1.0, tol),
    ];
    let again = reg.region.regularize()?.region;
    checks.push(Check::eq(
        "idempotence",
        (again.inside() != reg.region.inside()) as u8 as f64,
        0.0,
        0.0,
    ));
    if let Some(p) = partner {
        let v = p.build(grid)?;
        let union = w.union_disjoint(&v)?;
        let tau_u = union.tau()?;
        checks.push(Check::eq("additivity", tau_u, tau + v.tau()?, tol));
        checks.push(Check::le("monotonicity", tau, tau_u, tol));
    }
    // Inner regularity: shrinking collars approach τ(W) from below.
    let mut best = f64::NEG_INFINITY;
    for delta in [1e-3, 1e-6, 1e-9, 1e-12] {
        let inner = spec.shrink(delta).build(grid)?.tau()?;
        checks.push(Check::le("inner collar", inner, tau, tol));
        best = best.max(inner);
    }
    checks.push(Check::eq("inner regularity", best, tau, tol));
    Ok(checks)
}

/// τ of grid-aligned linear annuli, and the packing bound for `1/n_pack`
/// annuli.
pub fn check_annulus_values(
    grid: TorusGrid,
    slopes: &[(i64, i64)],
    widths: &[f64],
    packings: &[usize],
) -> Result<Vec<(Value, Check)>> {
    let n = grid.n();
    let mut out = Vec::new();
    for &slope in slopes {
        for &width in widths {
            let a = LinearAnnulus::aligned(slope, n, 3, width)?;
            let w = a.subsurface(grid)?;
            let loops = w.boundary_loops();
            let expected_class = {
                let (k, l) = slope;
                if k < 0 || (k == 0 && l < 0) { (-k, -l) } else { (k, l) }
            };
            let inputs = json!({ "annulus": a });
            let essential = loops.len() == 2 && loops.iter().all(|l| l.winding_class() == expected_class);
            out.push((inputs.clone(), Check::eq("annulus boundary", essential as u8 as f64, 1.0, 0.0)));
            out.push((inputs, Check::eq("annulus value", w.tau()?, width, ANNULUS_TOLERANCE)));
        }
    }
    for &k in packings {
        let alpha = 1.0 / k as f64;
        for &slope in slopes {
            let a = LinearAnnulus::aligned(slope, n, 0, alpha)?;
            let translates: Vec<SubSurface> = (0..k - 1)
                .map(|j| a.shifted(j as f64 / (k - 1) as f64).subsurface(grid))
                .collect::<Result<_>>()?;
            let mut union = translates[0].clone();
            for t in &translates[1..] {
                union = union.union_disjoint(t)?;
            }
            let tau_w = translates[0].tau()?;
            let sum: f64 = translates.iter().map(|t| t.tau()).sum::<Result<f64>>()?;
            let inputs = json!({ "annulus": a, "translates": k - 1 });
            out.push((inputs.clone(), Check::eq("packing additivity", union.tau()?, sum, TAU_TOLERANCE)));
            out.push((inputs, Check::le("packing bound", (k - 1) as f64 * tau_w, 1.0, TAU_TOLERANCE)));
        }
    }
    Ok(out)
}

/// Checks and inputs of one battery case.
type CaseResult = Result<(Value, Vec<Check>)>;

fn run_case(battery: Battery, grid: TorusGrid, seed: u64, tol: f64) -> CaseResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match battery {
        Battery::Normalization => {
            let c = rng.gen_range(-3.0..3.0);
            let one = TorusField::constant(grid, 1.0)?;
            let cf = TorusField::constant(grid, c)?;
            let zero = TorusField::constant(grid, 0.0)?;
            Ok((
                json!({ "constant": c }),
                vec![
                    Check::eq("ζ(1) = 1", zeta_reeb(&one)?, 1.0, 0.0),
                    Check::eq("ζ(c) = c", zeta_reeb(&cf)?, c, 1e-12 * c.abs().max(1.0)),
                    Check::eq("ζ(0) = 0", zeta_reeb(&zero)?, 0.0, 0.0),
                ],
            ))
        }
        Battery::Positivity => {
            let (poly, h) = random_field(&mut rng, grid)?;
            let shifted = h.map_values(|x| x - h.min_value())?;
            let abs = h.map_values(f64::abs)?;
            Ok((
                json!({ "field": poly }),
                vec![
                    Check::le("positivity of H − min H", 0.0, zeta_reeb(&shifted)?, tol),
                    Check::le("positivity of |H|", 0.0, zeta_reeb(&abs)?, tol),
                ],
            ))
        }
        Battery::Monotone => {
            let (pa, a) = random_field(&mut rng, grid)?;
            let (pb, b) = random_field(&mut rng, grid)?;
            let kind = rng.gen_range(0..3);
            let (lo, hi) = match kind {
                0 => (a.zip_with(&b, f64::min)?, a.clone()),
                1 => (a.clone(), a.zip_with(&b, |x, y| x + 0.5 * y.abs())?),
                _ => (a.clone(), a.clone()),
            };
            Ok((json!({ "a": pa, "b": pb, "kind": kind }), vec![check_monotone(&lo, &hi, tol)?]))
        }
        Battery::Quasilinear => {
            let (poly, h) = random_field(&mut rng, grid)?;
            let (lo, hi) = (h.min_value(), h.max_value());
            let phi = PLReparam::random(&mut rng, lo, hi, MAX_LIPSCHITZ);
            let psi = PLReparam::random(&mut rng, lo, hi, MAX_LIPSCHITZ);
            let a = rng.gen_range(-2.0..2.0);
            let checks = check_quasilinearity(&h, &phi, &psi, a, tol)?;
            Ok((json!({ "field": poly, "phi": phi, "psi": psi, "scale": a }), checks))
        }
        Battery::TauAxioms => {
            let spec = SurfaceSpec::random(&mut rng, grid)?;
            let partner = SurfaceSpec::random_disjoint_partner(&mut rng, grid, &spec)?;
            let checks = check_tau_axioms_on(grid, &spec, partner.as_ref())?;
            Ok((json!({ "surface": spec, "partner": partner }), checks))
        }
        Battery::Annulus => {
            let slope = SLOPES[rng.gen_range(0..SLOPES.len())];
            let width = rng.gen_range(1..8) as f64 / 8.0;
            let a = LinearAnnulus::aligned(slope, grid.n(), rng.gen_range(0..grid.n() as i64), width)?;
            let tau = a.subsurface(grid)?.tau()?;
            Ok((json!({ "annulus": a }), vec![Check::eq("annulus value", tau, width, ANNULUS_TOLERANCE)]))
        }
        Battery::DiskVanishing => {
            let bump = Bump::random(&mut rng);
            let z = zeta_reeb(&bump.field(grid)?)?;
            Ok((json!({ "bump": bump }), vec![Check::eq("disk vanishing", z, 0.0, tol)]))
        }
        Battery::Symplectic => {
            let (poly, h) = random_field(&mut rng, grid)?;
            let maps = random_lattice_maps(&mut rng, grid, 10);
            let checks = check_symplectic_invariance(&h, &maps, INVARIANCE_TOLERANCE)?;
            Ok((json!({ "field": poly, "maps": maps }), checks))
        }
        Battery::Topology => {
            let (poly, h) = random_field(&mut rng, grid)?;
            let betti = ReebGraph::build(&h).map(|g| g.betti_number()).unwrap_or(0);
            Ok((json!({ "field": poly }), vec![Check::eq("Betti number", betti as f64, 1.0, 0.0)]))
        }
    }
}

/// Triangulation-preserving lattice maps: a hexagonal rotation followed by
/// a random translation.
pub fn random_lattice_maps(rng: &mut impl Rng, grid: TorusGrid, count: usize) -> Vec<LatticeSymplectomorphism> {
    let rots = LatticeSymplectomorphism::hexagonal_rotations();
    let n = grid.n() as i64;
    (0..count)
        .map(|k| {
            let t = (rng.gen_range(0..n), rng.gen_range(0..n));
            LatticeSymplectomorphism::new(rots[k % rots.len()], t).expect("rotations are unimodular")
        })
        .collect()
}

/// Runs `cfg.count` seeded cases in parallel; results keep case order.
pub fn run_battery(battery: Battery, cfg: &BatteryConfig) -> Result<BatteryReport> {
    let start = Instant::now();
    let grid = TorusGrid::new(cfg.n)?;
    let outcomes: Vec<(u64, CaseResult)> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let seed = case_seed(cfg.seed, i);
            (seed, run_case(battery, grid, seed, cfg.tolerance))
        })
        .collect();
    let mut checks = 0;
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok((inputs, cs)) => {
                checks += cs.len();
                for c in cs.into_iter().filter(|c| !c.passed()) {
                    failures.push(Failure {
                        seed,
                        property: c.property,
                        inputs: inputs.clone(),
                        lhs: c.lhs,
                        rhs: c.rhs,
                        tol: c.tol,
                    });
                }
            }
            // A case that cannot be evaluated (e.g. a Reeb graph with the
            // wrong Betti number) counts as a failed check.
            Err(e) => {
                checks += 1;
                failures.push(Failure {
                    seed,
                    property: format!("error: {e}"),
                    inputs: Value::Null,
                    lhs: f64::NAN,
                    rhs: f64::NAN,
                    tol: 0.0,
                });
            }
        }
    }
    Ok(BatteryReport {
        battery,
        n: cfg.n,
        seed: cfg.seed,
        cases: cfg.count,
        checks,
        failures,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Replays a single case by its recorded seed.
pub fn replay_case(battery: Battery, n: usize, seed: u64, tol: f64) -> Result<Vec<Check>> {
    Ok(run_case(battery, TorusGrid::new(n)?, seed, tol)?.1)
}

/// Fixed annulus table: every listed slope and width, plus packings.
pub fn annulus_table(grid: TorusGrid) -> Result<BatteryReport> {
    let start = Instant::now();
    let rows = check_annulus_values(
        grid,
        &[(1, 0), (0, 1), (1, 1), (1, -1), (2, 1)],
        &[0.125, 0.25, 0.5, 0.75],
        &[3, 4, 8],
    )?;
    let checks = rows.len();
    let failures = rows
        .into_iter()
        .filter(|(_, c)| !c.passed())
        .map(|(inputs, c)| Failure { seed: 0, property: c.property, inputs, lhs: c.lhs, rhs: c.rhs, tol: c.tol })
        .collect();
    Ok(BatteryReport {
        battery: Battery::Annulus,
        n: grid.n(),
        seed: 0,
        cases: checks,
        checks,
        failures,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
