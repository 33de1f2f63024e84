//! Delzant polytopes in facet representation.
//!
//! A polytope is stored as the intersection of half-spaces
//!
//! ```text
//! P = { s : l_i(s) = <s, u_i> - lambda_i >= 0,  i = 1..d }
//! ```
//!
//! with primitive integer inward normals `u_i`. Construction enumerates the
//! vertices by brute force over n-element facet subsets (inputs here are
//! desk-scale: at most 20 facets, dimension at most 4), certifies
//! boundedness via the recession cone, and requires a nonempty interior.
//!
//! The Delzant condition — every vertex lies on exactly n facets whose
//! normals form a lattice basis — is checked separately and reported rather
//! than enforced, so mildly degenerate inputs can still be inspected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasibility slack for vertex enumeration and membership tests.
pub const TOL_FEAS: f64 = 1e-9;
/// A facet counts as active at a vertex when |l_i(v)| is below this.
pub const TOL_ACTIVE: f64 = 1e-7;
/// Vertices closer than this are considered duplicates.
const TOL_DEDUPE: f64 = 1e-7;
/// Vertex enumeration is brute force; refuse silly facet counts.
const MAX_FACETS: usize = 20;

/// One half-space `<s, u> - lambda >= 0` with primitive integer normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: f64,
}

impl Facet {
    /// Value of the affine form `l(s) = <s, u> - lambda`.
    pub fn value(&self, s: &[f64]) -> f64 {
        let dot: f64 = self
            .normal
            .iter()
            .zip(s)
            .map(|(&u, &x)| u as f64 * x)
            .sum();
        dot - self.offset
    }

    pub fn normal_len(&self) -> f64 {
        self.normal
            .iter()
            .map(|&u| (u as f64) * (u as f64))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FacetJson {
    u: Vec<i64>,
    lambda: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolytopeJson {
    dim: usize,
    facets: Vec<FacetJson>,
    #[serde(default)]
    translate: Option<Vec<f64>>,
}

/// Bounded polytope with enumerated vertices.
#[derive(Debug, Clone)]
pub struct DelzantPolytope {
    dim: usize,
    facets: Vec<Facet>,
    /// Lexicographically sorted, deduplicated.
    vertices: Vec<Vec<f64>>,
    /// Indices of active facets per vertex, parallel to `vertices`.
    vertex_facets: Vec<Vec<usize>>,
    /// Cumulative translation applied relative to the originally stated
    /// half-space data (zero unless `translate` was used).
    translation: Vec<f64>,
}

/// Inscribed/circumscribed ball radii about the origin: the largest b and
/// smallest a with `B(0, b) <= P <= B(0, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallConstants {
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexCheck {
    pub vertex: Vec<f64>,
    pub active_facets: Vec<usize>,
    /// |det| of the active normals when exactly `dim` facets are active.
    pub det_abs: Option<i64>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub is_delzant: bool,
    pub dim: usize,
    pub facet_count: usize,
    pub vertex_count: usize,
    pub vertices: Vec<VertexCheck>,
    pub issues: Vec<String>,
}

impl DelzantPolytope {
    /// Build from half-space data, enumerating and certifying the vertex set.
    pub fn from_facets(dim: usize, facets: Vec<Facet>) -> Result<Self> {
        if dim == 0 || dim > 4 {
            return Err(Error::Geometry(format!(
                "dimension {dim} unsupported (need 1 <= n <= 4)"
            )));
        }
        if facets.len() > MAX_FACETS {
            return Err(Error::Geometry(format!(
                "{} facets exceed the supported maximum of {MAX_FACETS}",
                facets.len()
            )));
        }
        if facets.len() < dim + 1 {
            return Err(Error::Geometry(format!(
                "{} facets cannot bound a {dim}-dimensional polytope",
                facets.len()
            )));
        }
        for (i, f) in facets.iter().enumerate() {
            if f.normal.len() != dim {
                return Err(Error::Dimension(format!(
                    "facet {i} normal has {} entries, expected {dim}",
                    f.normal.len()
                )));
            }
            if f.normal.iter().all(|&u| u == 0) {
                return Err(Error::Geometry(format!("facet {i} has zero normal")));
            }
            let g = f.normal.iter().fold(0i64, |g, &u| gcd(g, u.abs()));
            if g != 1 {
                return Err(Error::Geometry(format!(
                    "facet {i} normal {:?} is not primitive (gcd {g})",
                    f.normal
                )));
            }
            if !f.offset.is_finite() {
                return Err(Error::Geometry(format!("facet {i} offset is not finite")));
            }
        }

        if let Some(ray) = recession_ray(dim, &facets) {
            return Err(Error::Geometry(format!(
                "polytope is unbounded: direction {ray:?} satisfies <d, u_i> >= 0 for every facet"
            )));
        }

        let (vertices, vertex_facets) = enumerate_vertices(dim, &facets)?;
        if vertices.is_empty() {
            return Err(Error::Geometry("no feasible vertex: polytope is empty".into()));
        }

        // A bounded polytope is the hull of its vertices; the vertex centroid
        // is interior iff the interior is nonempty.
        let mut centroid = vec![0.0; dim];
        for v in &vertices {
            for k in 0..dim {
                centroid[k] += v[k];
            }
        }
        for c in &mut centroid {
            *c /= vertices.len() as f64;
        }
        let min_l = facets
            .iter()
            .map(|f| f.value(&centroid))
            .fold(f64::INFINITY, f64::min);
        if min_l <= TOL_FEAS {
            return Err(Error::Geometry(format!(
                "polytope has empty interior (vertex centroid {centroid:?} has min facet value {min_l:.3e})"
            )));
        }

        Ok(DelzantPolytope {
            dim,
            facets,
            vertices,
            vertex_facets,
            translation: vec![0.0; dim],
        })
    }

    /// Parse the JSON interchange format:
    /// `{"dim": n, "facets": [{"u": [..], "lambda": ..}, ...], "translate": [..]?}`.
    /// Unknown fields are rejected. The optional `translate` vector is applied
    /// to the stated polytope before any other processing.
    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: PolytopeJson =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("polytope JSON: {e}")))?;
        let facets = parsed
            .facets
            .into_iter()
            .map(|f| Facet {
                normal: f.u,
                offset: f.lambda,
            })
            .collect();
        let p = Self::from_facets(parsed.dim, facets)?;
        match parsed.translate {
            Some(theta) => {
                if theta.len() != parsed.dim {
                    return Err(Error::Dimension(format!(
                        "translate vector has {} entries, expected {}",
                        theta.len(),
                        parsed.dim
                    )));
                }
                Ok(p.translate(&theta))
            }
            None => Ok(p),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    #[inline]
    pub fn vertex_facets(&self) -> &[Vec<usize>] {
        &self.vertex_facets
    }

    #[inline]
    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// All facet values `l_i(s)` in facet order.
    pub fn facet_values(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(s)?;
        Ok(self.facets.iter().map(|f| f.value(s)).collect())
    }

    /// Support function `F_P(x) = max_{s in P} <x, s>`, a piecewise-linear
    /// convex function realized as the maximum over the vertices.
    pub fn support_value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.vertices
            .iter()
            .map(|v| dot(x, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, s: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| f.value(s) >= -tol)
    }

    pub fn interior_contains(&self, s: &[f64]) -> bool {
        self.facets.iter().all(|f| f.value(s) > TOL_FEAS)
    }

    /// Euclidean distance from an interior point to the boundary:
    /// `min_i l_i(s) / |u_i|`. Errors when `s` is not interior.
    pub fn boundary_distance(&self, s: &[f64]) -> Result<f64> {
        self.check_dim(s)?;
        let d = self
            .facets
            .iter()
            .map(|f| f.value(s) / f.normal_len())
            .fold(f64::INFINITY, f64::min);
        if d <= 0.0 {
            return Err(Error::Precondition(format!(
                "point {s:?} is not in the interior (min scaled facet value {d:.3e})"
            )));
        }
        Ok(d)
    }

    /// Same as `boundary_distance` but clamps exterior points to zero
    /// instead of erroring; used by quadrature margins.
    pub fn boundary_distance_clamped(&self, s: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|f| f.value(s) / f.normal_len())
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }

    /// Translate: `P + theta`, shifting offsets by `<theta, u_i>`.
    pub fn translate(&self, theta: &[f64]) -> Self {
        assert_eq!(theta.len(), self.dim);
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: f.offset
                    + f.normal
                        .iter()
                        .zip(theta)
                        .map(|(&u, &t)| u as f64 * t)
                        .sum::<f64>(),
            })
            .collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().zip(theta).map(|(a, b)| a + b).collect())
            .collect();
        let translation = self
            .translation
            .iter()
            .zip(theta)
            .map(|(a, b)| a + b)
            .collect();
        DelzantPolytope {
            dim: self.dim,
            facets,
            vertices,
            vertex_facets: self.vertex_facets.clone(),
            translation,
        }
    }

    /// Dilate about the origin: `c P` for `c > 0`.
    pub fn dilate(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Precondition(format!("dilation factor must be positive, got {c}")));
        }
        let facets = self
            .facets
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: c * f.offset,
            })
            .collect();
        let vertices = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|x| c * x).collect())
            .collect();
        DelzantPolytope {
            dim: self.dim,
            facets,
            vertices,
            vertex_facets: self.vertex_facets.clone(),
            translation: self.translation.iter().map(|t| c * t).collect(),
        }
        .pipe_ok()
    }

    /// Vertex centroid, an interior point of a bounded polytope.
    pub fn vertex_centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            for k in 0..self.dim {
                c[k] += v[k];
            }
        }
        for x in &mut c {
            *x /= self.vertices.len() as f64;
        }
        c
    }

    /// Translate so the vertex centroid moves to the origin; returns the
    /// recentred polytope and the applied shift.
    pub fn centered(&self) -> (Self, Vec<f64>) {
        let theta: Vec<f64> = self.vertex_centroid().iter().map(|c| -c).collect();
        (self.translate(&theta), theta)
    }

    /// Axis-aligned bounding box of the vertex set.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|k| {
                let lo = self.vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min);
                let hi = self
                    .vertices
                    .iter()
                    .map(|v| v[k])
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect()
    }

    /// Euclidean volume, exact up to facet-incidence tolerance, via the
    /// recursive cone-over-faces decomposition. Supported for n <= 4.
    pub fn volume(&self) -> Result<f64> {
        face_volume(&self.vertices.iter().collect::<Vec<_>>(), &self.facets, self.dim)
    }

    /// Ball constants about the origin. Precondition: 0 interior to P.
    pub fn ball_constants(&self) -> Result<BallConstants> {
        let zero = vec![0.0; self.dim];
        if !self.interior_contains(&zero) {
            return Err(Error::Precondition(
                "ball constants need 0 in the interior; translate the polytope first".into(),
            ));
        }
        let inner = self
            .facets
            .iter()
            .map(|f| -f.offset / f.normal_len())
            .fold(f64::INFINITY, f64::min);
        let outer = self
            .vertices
            .iter()
            .map(|v| dot(v, v).sqrt())
            .fold(0.0f64, f64::max);
        Ok(BallConstants { inner, outer })
    }

    /// Largest inscribed-ball radius (about the best interior center found)
    /// and circumradius about that center. Used as a geometry-scale
    /// heuristic, not an exact Chebyshev computation: the center is the
    /// vertex centroid.
    pub fn inradius_circumradius(&self) -> (f64, f64) {
        let c = self.vertex_centroid();
        let inr = self.boundary_distance_clamped(&c);
        let circ = self
            .vertices
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&c)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        (inr, circ)
    }

    /// Delzant check: every vertex simple (exactly n active facets) with
    /// active normals forming a lattice basis (|det| = 1).
    pub fn validate_delzant(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let mut checks = Vec::new();
        let mut all_ok = true;
        for (v, active) in self.vertices.iter().zip(&self.vertex_facets) {
            let mut ok = true;
            let mut det_abs = None;
            if active.len() != self.dim {
                issues.push(format!(
                    "vertex {v:?} lies on {} facets, expected {}",
                    active.len(),
                    self.dim
                ));
                ok = false;
            } else {
                let rows: Vec<&[i64]> = active
                    .iter()
                    .map(|&i| self.facets[i].normal.as_slice())
                    .collect();
                let d = int_det(&rows).abs();
                det_abs = Some(d as i64);
                if d != 1 {
                    issues.push(format!(
                        "vertex {v:?} has active normal determinant {d}, expected 1"
                    ));
                    ok = false;
                }
            }
            all_ok &= ok;
            checks.push(VertexCheck {
                vertex: v.clone(),
                active_facets: active.clone(),
                det_abs,
                ok,
            });
        }
        ValidationReport {
            is_delzant: all_ok,
            dim: self.dim,
            facet_count: self.facets.len(),
            vertex_count: self.vertices.len(),
            vertices: checks,
            issues,
        }
    }

    fn check_dim(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.dim {
            return Err(Error::Dimension(format!(
                "point has {} coordinates, polytope dimension is {}",
                s.len(),
                self.dim
            )));
        }
        Ok(())
    }

    fn pipe_ok(self) -> Result<Self> {
        Ok(self)
    }
}

// === presets ===============================================================

/// The unit interval [0, 1]: facets `s >= 0` and `1 - s >= 0`.
pub fn interval() -> DelzantPolytope {
    DelzantPolytope::from_facets(
        1,
        vec![
            Facet { normal: vec![1], offset: 0.0 },
            Facet { normal: vec![-1], offset: -1.0 },
        ],
    )
    .expect("unit interval is a valid polytope")
}

/// The standard simplex `{ s_i >= 0, sum s_i <= 1 }` in dimension n.
pub fn simplex(n: usize) -> DelzantPolytope {
    let mut facets: Vec<Facet> = (0..n)
        .map(|i| {
            let mut u = vec![0i64; n];
            u[i] = 1;
            Facet { normal: u, offset: 0.0 }
        })
        .collect();
    facets.push(Facet {
        normal: vec![-1; n],
        offset: -1.0,
    });
    DelzantPolytope::from_facets(n, facets).expect("standard simplex is a valid polytope")
}

/// Trapezoid `{ s >= 0, b <= s_1 + s_2 <= a + b }` (the first Hirzebruch
/// surface's moment polytope for parameters a, b > 0).
pub fn hirzebruch(a: f64, b: f64) -> Result<DelzantPolytope> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Precondition(format!(
            "hirzebruch parameters must be positive, got a={a}, b={b}"
        )));
    }
    DelzantPolytope::from_facets(
        2,
        vec![
            Facet { normal: vec![1, 0], offset: 0.0 },
            Facet { normal: vec![0, 1], offset: 0.0 },
            Facet { normal: vec![-1, -1], offset: -(a + b) },
            Facet { normal: vec![1, 1], offset: b },
        ],
    )
}

// === internals =============================================================

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact integer determinant by cofactor expansion (n <= 4).
fn int_det(rows: &[&[i64]]) -> i128 {
    let n = rows.len();
    match n {
        1 => rows[0][0] as i128,
        2 => rows[0][0] as i128 * rows[1][1] as i128 - rows[0][1] as i128 * rows[1][0] as i128,
        _ => {
            let mut det = 0i128;
            for j in 0..n {
                if rows[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let minor_refs: Vec<&[i64]> = minor.iter().map(|r| r.as_slice()).collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                det += sign as i128 * rows[0][j] as i128 * int_det(&minor_refs);
            }
            det
        }
    }
}

/// Solve `A x = b` for a small square system; None when singular.
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if piv_abs < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    // adding 0.0 turns -0.0 into +0.0 so downstream ordering never sees
    // two distinct zeros
    Some((0..n).map(|r| m[r][n] / m[r][r] + 0.0).collect())
}

/// Nonzero direction with `<d, u_i> >= 0` for all facets, if one exists.
/// Existence is equivalent to unboundedness of a nonempty polyhedron.
fn recession_ray(dim: usize, facets: &[Facet]) -> Option<Vec<f64>> {
    let feasible = |d: &[f64]| {
        facets.iter().all(|f| {
            f.normal
                .iter()
                .zip(d)
                .map(|(&u, &x)| u as f64 * x)
                .sum::<f64>()
                >= -1e-9
        })
    };
    if dim == 1 {
        for d in [vec![1.0], vec![-1.0]] {
            if feasible(&d) {
                return Some(d);
            }
        }
        return None;
    }
    // A line in the cone: direction orthogonal to all normals.
    if let Some(d) = null_direction(dim, facets, &(0..facets.len()).collect::<Vec<_>>()) {
        return Some(d);
    }
    // Otherwise the cone is pointed, so a nonzero cone has an extreme ray
    // lying on dim-1 independent active constraints.
    let idx: Vec<usize> = (0..facets.len()).collect();
    for subset in subsets(&idx, dim - 1) {
        if let Some(d) = null_direction(dim, facets, &subset) {
            if feasible(&d) {
                return Some(d);
            }
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            if feasible(&neg) {
                return Some(neg);
            }
        }
    }
    None
}

/// Unit vector orthogonal to the normals of the given facets when their
/// span has corank exactly one (corank > 1 cases are reached through
/// smaller subsets).
fn null_direction(dim: usize, facets: &[Facet], subset: &[usize]) -> Option<Vec<f64>> {
    // Gram-Schmidt on the chosen normals, then complete to find a vector
    // orthogonal to all of them.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &i in subset {
        let mut v: Vec<f64> = facets[i].normal.iter().map(|&u| u as f64).collect();
        for b in &basis {
            let c = dot(&v, b);
            for k in 0..dim {
                v[k] -= c * b[k];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
    }
    if basis.len() != dim - 1 && !(subset.len() == facets.len() && basis.len() < dim) {
        return None;
    }
    // Try the coordinate directions projected out of the span.
    for seed in 0..dim {
        let mut v = vec![0.0; dim];
        v[seed] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            for k in 0..dim {
                v[k] -= c * b[k];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            for x in &mut v {
                *x /= n;
            }
            return Some(v);
        }
    }
    None
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

fn enumerate_vertices(dim: usize, facets: &[Facet]) -> Result<(Vec<Vec<f64>>, Vec<Vec<usize>>)> {
    let idx: Vec<usize> = (0..facets.len()).collect();
    let mut verts: Vec<Vec<f64>> = Vec::new();
    for subset in subsets(&idx, dim) {
        let a: Vec<Vec<f64>> = subset
            .iter()
            .map(|&i| facets[i].normal.iter().map(|&u| u as f64).collect())
            .collect();
        let b: Vec<f64> = subset.iter().map(|&i| facets[i].offset).collect();
        let Some(v) = solve(&a, &b) else { continue };
        if facets.iter().all(|f| f.value(&v) >= -TOL_FEAS) {
            if !verts
                .iter()
                .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= TOL_DEDUPE))
            {
                verts.push(v);
            }
        }
    }
    verts.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            match x.total_cmp(y) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        std::cmp::Ordering::Equal
    });
    let vertex_facets = verts
        .iter()
        .map(|v| {
            facets
                .iter()
                .enumerate()
                .filter(|(_, f)| f.value(v).abs() <= TOL_ACTIVE)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    Ok((verts, vertex_facets))
}

/// k-dimensional volume of the face spanned by `verts` (all lying in a
/// common k-dimensional affine subspace), decomposed as cones over its
/// (k-1)-faces from the face centroid. Sub-faces are cut out by the
/// original facet list.
fn face_volume(verts: &[&Vec<f64>], facets: &[Facet], k: usize) -> Result<f64> {
    if verts.len() < k + 1 {
        return Err(Error::Geometry(format!(
            "face with {} vertices cannot have dimension {k}",
            verts.len()
        )));
    }
    if k == 1 {
        let mut best = 0.0f64;
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                let d = verts[i]
                    .iter()
                    .zip(verts[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                best = best.max(d);
            }
        }
        return Ok(best);
    }
    let dim = verts[0].len();
    let mut centroid = vec![0.0; dim];
    for v in verts {
        for t in 0..dim {
            centroid[t] += v[t];
        }
    }
    for c in &mut centroid {
        *c /= verts.len() as f64;
    }

    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut vol = 0.0;
    for f in facets {
        let sub: Vec<usize> = (0..verts.len())
            .filter(|&i| f.value(verts[i]).abs() <= TOL_ACTIVE)
            .collect();
        if sub.len() < k || sub.len() == verts.len() {
            continue;
        }
        if affine_rank(&sub.iter().map(|&i| verts[i]).collect::<Vec<_>>()) != k - 1 {
            continue;
        }
        let mut key = sub.clone();
        key.sort_unstable();
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let sub_verts: Vec<&Vec<f64>> = sub.iter().map(|&i| verts[i]).collect();
        let h = affine_distance(&centroid, &sub_verts);
        vol += h * face_volume(&sub_verts, facets, k - 1)? / k as f64;
    }
    Ok(vol)
}

fn affine_rank(pts: &[&Vec<f64>]) -> usize {
    if pts.len() <= 1 {
        return 0;
    }
    let dim = pts[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &pts[1..] {
        let mut v: Vec<f64> = p.iter().zip(pts[0]).map(|(a, b)| a - b).collect();
        for b in &basis {
            let c = dot(&v, b);
            for t in 0..dim {
                v[t] -= c * b[t];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
    }
    basis.len()
}

/// Distance from `p` to the affine hull of `pts`.
fn affine_distance(p: &[f64], pts: &[&Vec<f64>]) -> f64 {
    let dim = p.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for q in &pts[1..] {
        let mut v: Vec<f64> = q.iter().zip(pts[0]).map(|(a, b)| a - b).collect();
        for b in &basis {
            let c = dot(&v, b);
            for t in 0..dim {
                v[t] -= c * b[t];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-9 {
            for x in &mut v {
                *x /= n;
            }
            basis.push(v);
        }
    }
    let mut r: Vec<f64> = p.iter().zip(pts[0]).map(|(a, b)| a - b).collect();
    for b in &basis {
        let c = dot(&r, b);
        for t in 0..dim {
            r[t] -= c * b[t];
        }
    }
    dot(&r, &r).sqrt()
}
