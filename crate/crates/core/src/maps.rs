//! The map catalog: explicit smooth maps between the manifolds, their exact
//! differentials, and the bundle structure they cover.
//!
//! Maps are evaluated on ambient real coordinates through one generic code
//! path ([`MapHandle::eval_ambient`]), instantiated at `f64` for values and at
//! [`Dual`] for directional derivatives.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{
    self, complete_to_su3, cx3_from_ambient, deviation_ambient, mat_from_ambient, ManifoldId,
    Point, SU3Matrix, Seed, EPS_MEMBERSHIP,
};
use crate::scalar::{
    lift_mat3, mat3_adjoint, mat3_mul, mat3_powi, read_cx, read_mat3, write_cx, write_mat3, CMat3,
    Cx, Dual, Scalar,
};

/// Below this value of `|a|² + |b|²` the normalized `g` is treated as
/// non-smooth.
pub const G_SINGULAR_RADIUS_SQ: f64 = 1e-8;

/// Below this `|z|` a suspension map of degree other than ±1 is treated as
/// non-smooth.
pub const SUSPENSION_POLE_RADIUS: f64 = 1e-9;

/// Which version of the `g` entries to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GVariant {
    /// First two columns divided by `|a|² + |b|²`; maps SU(3) to SU(3).
    Normalized,
    /// Entries exactly as the closed-form display, without normalization.
    Unnormalized,
    /// Normalized, with one sign flipped in entry (1,1). Fault-injection hook.
    CorruptedEntry,
}

#[derive(Clone)]
pub(crate) enum MapKind {
    Identity,
    ThirdColumn,
    QuadraticF,
    G,
    Su2Power(i32),
    Suspension(i32),
    Su3Power(i32),
    Product(Arc<MapHandle>, Arc<MapHandle>),
    Compose {
        outer: Arc<MapHandle>,
        inner: Arc<MapHandle>,
    },
    IntoPullback,
    PullbackTotal,
    PullbackBase,
    ProductBase,
    Fiber(Arc<FiberData>),
}

/// Data of a fiber restriction `S³ → S³`: the source fiber is parametrized
/// as `U ↦ T0·U` over `source_base`, and target points are read back as
/// `T1†·Y`.
#[derive(Clone)]
pub(crate) struct FiberData {
    total: Arc<MapHandle>,
    source_base: Vec<f64>,
    t0: CMat3<f64>,
    t1: CMat3<f64>,
}

#[derive(Clone)]
pub struct MapHandle {
    pub id: String,
    pub source: ManifoldId,
    pub target: ManifoldId,
    kind: MapKind,
    covering: Option<Arc<MapHandle>>,
}

impl fmt::Debug for MapHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MapHandle")
            .field("id", &self.id)
            .field("source", &self.source)
            .field("target", &self.target)
            .field("covers", &self.covering.as_ref().map(|b| b.id.clone()))
            .finish()
    }
}

/// Ambient Jacobian of a map at a point.
#[derive(Clone, Debug)]
pub struct Differential {
    pub point: Point,
    /// `target_ambient_dim × source_ambient_dim`.
    pub matrix: DMatrix<f64>,
}

fn handle(
    id: impl Into<String>,
    source: ManifoldId,
    target: ManifoldId,
    kind: MapKind,
) -> MapHandle {
    MapHandle {
        id: id.into(),
        source,
        target,
        kind,
        covering: None,
    }
}

impl MapHandle {
    /// Base map on S⁵, when this map is a bundle map.
    pub fn base_map(&self) -> Option<&MapHandle> {
        self.covering.as_deref()
    }

    /// Declares that this map covers `base` (`π∘φ = base∘π`). The claim is
    /// not checked here; see [`check_covers`].
    pub fn with_covering(mut self, base: &MapHandle) -> MapHandle {
        self.covering = Some(Arc::new(base.clone()));
        self
    }

    pub fn renamed(mut self, id: impl Into<String>) -> MapHandle {
        self.id = id.into();
        self
    }

    pub fn eval_ambient<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        match &self.kind {
            MapKind::Identity => Ok(x.to_vec()),
            MapKind::ThirdColumn => {
                let m = read_mat3(x);
                let mut out = Vec::with_capacity(6);
                write_cx(&[m[0][2], m[1][2], m[2][2]], &mut out);
                Ok(out)
            }
            MapKind::QuadraticF => {
                let z = read_cx(x);
                let mut out = Vec::with_capacity(6);
                write_cx(&quadratic_f(z[0], z[1], z[2]), &mut out);
                Ok(out)
            }
            MapKind::G => {
                let g = g_formula(&read_mat3(x), GVariant::Normalized)?;
                let mut out = Vec::with_capacity(18);
                write_mat3(&g, &mut out);
                Ok(out)
            }
            MapKind::Su2Power(k) => {
                let z = read_cx(x);
                let (a, b) = su2_pow(z[0], z[1], *k);
                let mut out = Vec::with_capacity(4);
                write_cx(&[a, b], &mut out);
                Ok(out)
            }
            MapKind::Suspension(d) => suspend(x, *d),
            MapKind::Su3Power(k) => {
                let m = mat3_powi(&read_mat3(x), *k);
                let mut out = Vec::with_capacity(18);
                write_mat3(&m, &mut out);
                Ok(out)
            }
            MapKind::Product(first, second) => {
                let (a, b) = x.split_at(first.source.ambient_dim());
                let mut out = first.eval_ambient(a)?;
                out.extend(second.eval_ambient(b)?);
                Ok(out)
            }
            MapKind::Compose { outer, inner } => outer.eval_ambient(&inner.eval_ambient(x)?),
            MapKind::IntoPullback => {
                let m = read_mat3(x);
                let g = g_formula(&m, GVariant::Normalized)?;
                let mut out = Vec::with_capacity(24);
                write_cx(&[m[0][2], m[1][2], m[2][2]], &mut out);
                write_mat3(&g, &mut out);
                Ok(out)
            }
            MapKind::PullbackTotal => Ok(x[6..].to_vec()),
            MapKind::PullbackBase => Ok(x[..6].to_vec()),
            MapKind::ProductBase => Ok(x[4..].to_vec()),
            MapKind::Fiber(data) => data.eval(x),
        }
    }

    pub fn eval(&self, x: &Point) -> Result<Point> {
        let y = self.eval_ambient::<f64>(&x.ambient())?;
        Point::from_ambient(&self.target, &y)
    }

    /// Directional derivative `dφ_x(v)` of the ambient extension.
    pub fn push_forward(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let dx: Vec<Dual> = x.iter().zip(v).map(|(&a, &b)| Dual::new(a, b)).collect();
        Ok(self.eval_ambient(&dx)?.into_iter().map(|d| d.eps).collect())
    }

    /// The pushed-forward columns of `frame`, as a matrix.
    pub(crate) fn push_frame(&self, x: &[f64], frame: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.target.ambient_dim(), frame.ncols());
        for k in 0..frame.ncols() {
            let v: Vec<f64> = frame.column(k).iter().copied().collect();
            let col = self.push_forward(x, &v)?;
            out.set_column(k, &nalgebra::DVector::from_vec(col));
        }
        Ok(out)
    }
}

impl FiberData {
    fn eval<S: Scalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let z = read_cx(x);
        let u = su2_matrix(z[0], z[1]);
        let t0: CMat3<S> = lift_mat3(&self.t0);
        let fiber_point = mat3_mul(&t0, &u);
        let source_base =
            || -> Vec<S> { self.source_base.iter().map(|&v| S::from_f64(v)).collect() };
        let input: Vec<S> = match &self.total.source {
            ManifoldId::SU3 => {
                let mut out = Vec::with_capacity(18);
                write_mat3(&fiber_point, &mut out);
                out
            }
            ManifoldId::Pullback(_) => {
                let mut out = source_base();
                write_mat3(&fiber_point, &mut out);
                out
            }
            ManifoldId::S3xS5 => {
                let mut out = x.to_vec();
                out.extend(source_base());
                out
            }
            other => return Err(Error::Unsupported(format!("fiber of {other}"))),
        };
        let y = self.total.eval_ambient(&input)?;
        let t1: CMat3<S> = lift_mat3(&self.t1);
        let read_back = |tm: &[S]| -> Vec<S> {
            let v = mat3_mul(&mat3_adjoint(&t1), &read_mat3(tm));
            let mut out = Vec::with_capacity(4);
            write_cx(&[v[0][0], v[0][1]], &mut out);
            out
        };
        match &self.total.target {
            ManifoldId::SU3 => Ok(read_back(&y)),
            ManifoldId::Pullback(_) => Ok(read_back(&y[6..])),
            ManifoldId::S3xS5 => Ok(y[..4].to_vec()),
            other => Err(Error::Unsupported(format!("fiber of {other}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// formulas

/// `(u, v, w) ↦ (u·w + v̄, v·w − ū, w²)`.
pub(crate) fn quadratic_f<S: Scalar>(u: Cx<S>, v: Cx<S>, w: Cx<S>) -> [Cx<S>; 3] {
    [u * w + v.conj(), v * w - u.conj(), w * w]
}

/// The closed-form self-map of SU(3) covering [`map_f`]. It reads only the
/// entries `a, b` (first row) and `u, v, w` (third column) of
/// `A = [[a, b, u], [c, d, v], [p, q, w]]`.
///
/// Without normalization the first two columns have norm `|a|² + |b|² =
/// 1 − |u|²`, so the matrix is unitary only on the fiber over `u = 0`.
/// [`GVariant::Normalized`] divides them by that factor; the result is
/// special unitary wherever `|u| < 1`.
pub fn g_formula<S: Scalar>(m: &CMat3<S>, variant: GVariant) -> Result<CMat3<S>> {
    let (a, b) = (m[0][0], m[0][1]);
    let (u, v, w) = (m[0][2], m[1][2], m[2][2]);
    let real = |s: S| Cx::new(s, S::zero());

    // conj(ab) + a·conj(b)
    let ab_sym = (a * b).conj() + a * b.conj();
    // −a² + |b|²
    let neg_a2_plus_b2 = -(a * a) + real(b.norm_sqr());
    // conj(a)² − |b|²
    let abar2_minus_b2 = a.conj() * a.conj() - real(b.norm_sqr());
    // ab + conj(a)·b
    let ab_plus_abar_b = a * b + a.conj() * b;

    let uv_minus_wbar = u * v - w.conj();
    let uv_plus_wbar = u * v + w.conj();
    let uw_minus_vbar = u * w - v.conj();
    let ubar_plus_vw = u.conj() + v * w;

    let mut g11 = -(u * u) * ab_sym + uv_minus_wbar * neg_a2_plus_b2;
    let g12 = u * u * abar2_minus_b2 - uv_minus_wbar * ab_plus_abar_b;
    let g21 = -uv_plus_wbar * ab_sym + v * v * neg_a2_plus_b2;
    let g22 = uv_plus_wbar * abar2_minus_b2 - v * v * ab_plus_abar_b;
    let g31 = -uw_minus_vbar * ab_sym + ubar_plus_vw * neg_a2_plus_b2;
    let g32 = uw_minus_vbar * abar2_minus_b2 - ubar_plus_vw * ab_plus_abar_b;
    let [g13, g23, g33] = quadratic_f(u, v, w);

    if variant == GVariant::CorruptedEntry {
        g11 = (u * u) * ab_sym + uv_minus_wbar * neg_a2_plus_b2;
    }

    let mut out = [[g11, g12, g13], [g21, g22, g23], [g31, g32, g33]];
    if variant != GVariant::Unnormalized {
        let r2 = a.norm_sqr() + b.norm_sqr();
        if r2.value() < G_SINGULAR_RADIUS_SQ {
            return Err(Error::NonSmoothPoint(
                "g is singular where the first row is (0, 0, u)".into(),
            ));
        }
        let inv = S::one() / r2;
        for row in out.iter_mut() {
            row[0] = row[0].scale(inv);
            row[1] = row[1].scale(inv);
        }
    }
    Ok(out)
}

fn su2_matrix<S: Scalar>(a: Cx<S>, b: Cx<S>) -> CMat3<S> {
    let z = Cx::zero();
    [[a, b, z], [-b.conj(), a.conj(), z], [z, z, Cx::one()]]
}

/// First row of `[[a, b], [−b̄, ā]]^k`.
fn su2_pow<S: Scalar>(a: Cx<S>, b: Cx<S>, k: i32) -> (Cx<S>, Cx<S>) {
    if k == 0 {
        return (Cx::one(), Cx::zero());
    }
    // quaternion product on first rows: (a, b)·(c, d) = (ac − b·d̄, ad + b·c̄)
    let (ba, bb) = if k < 0 { (a.conj(), -b) } else { (a, b) };
    let (mut ra, mut rb) = (ba, bb);
    for _ in 1..k.unsigned_abs() {
        let na = ra * ba - rb * bb.conj();
        let nb = ra * bb + rb * ba.conj();
        ra = na;
        rb = nb;
    }
    (ra, rb)
}

/// Suspension of `z ↦ z^d/|z|^{d−1}` on the first complex coordinate.
fn suspend<S: Scalar>(x: &[S], d: i32) -> Result<Vec<S>> {
    let mut out = x.to_vec();
    match d {
        1 => return Ok(out),
        -1 => {
            out[1] = -out[1];
            return Ok(out);
        }
        _ => {}
    }
    let z = Cx::new(x[0], x[1]);
    let r2 = z.norm_sqr();
    if r2.value().sqrt() < SUSPENSION_POLE_RADIUS {
        return Err(Error::NonSmoothPoint("suspension pole".into()));
    }
    let r = r2.sqrt();
    let unit = z.scale(S::one() / r);
    let image = unit.unit_powi(d).scale(r);
    out[0] = image.re;
    out[1] = image.im;
    Ok(out)
}

// ---------------------------------------------------------------------------
// catalog

pub fn identity(m: &ManifoldId) -> MapHandle {
    let id = match m {
        ManifoldId::S3 => "id_s3".to_string(),
        ManifoldId::S5 => "id_s5".to_string(),
        ManifoldId::SU3 => "id_su3".to_string(),
        ManifoldId::S3xS5 => "id_s3xs5".to_string(),
        ManifoldId::Pullback(b) => format!("id_pullback({})", b.id),
    };
    let h = handle(id, m.clone(), m.clone(), MapKind::Identity);
    if m.is_bundle_over_s5() {
        h.with_covering(&identity(&ManifoldId::S5))
    } else {
        h
    }
}

/// Projection `p: SU(3) → S⁵` to the third column.
pub fn projection_p() -> MapHandle {
    handle("p", ManifoldId::SU3, ManifoldId::S5, MapKind::ThirdColumn)
}

/// The degree-2 self-map of S⁵ covered by [`map_g`].
pub fn map_f() -> MapHandle {
    handle("f", ManifoldId::S5, ManifoldId::S5, MapKind::QuadraticF)
}

pub fn map_g() -> MapHandle {
    handle("g", ManifoldId::SU3, ManifoldId::SU3, MapKind::G).with_covering(&map_f())
}

pub fn su2_power(k: i32) -> MapHandle {
    handle(
        format!("su2pow:{k}"),
        ManifoldId::S3,
        ManifoldId::S3,
        MapKind::Su2Power(k),
    )
}

/// Degree-`d` self-map of S³ (`n = 3`) or S⁵ (`n = 5`).
pub fn suspension_power(n: u32, d: i32) -> Result<MapHandle> {
    let m = match n {
        3 => ManifoldId::S3,
        5 => ManifoldId::S5,
        _ => return Err(Error::Unsupported(format!("suspension on S^{n}"))),
    };
    Ok(handle(
        format!("susp{n}:{d}"),
        m.clone(),
        m,
        MapKind::Suspension(d),
    ))
}

pub fn su3_power(k: i32) -> MapHandle {
    handle(
        format!("su3pow:{k}"),
        ManifoldId::SU3,
        ManifoldId::SU3,
        MapKind::Su3Power(k),
    )
}

pub fn product_map(fiber: &MapHandle, base: &MapHandle) -> Result<MapHandle> {
    if fiber.source != ManifoldId::S3 || fiber.target != ManifoldId::S3 {
        return Err(Error::ManifoldMismatch {
            expected: "S3 -> S3".into(),
            found: format!("{} -> {}", fiber.source, fiber.target),
        });
    }
    if base.source != ManifoldId::S5 || base.target != ManifoldId::S5 {
        return Err(Error::ManifoldMismatch {
            expected: "S5 -> S5".into(),
            found: format!("{} -> {}", base.source, base.target),
        });
    }
    Ok(handle(
        format!("product({},{})", fiber.id, base.id),
        ManifoldId::S3xS5,
        ManifoldId::S3xS5,
        MapKind::Product(Arc::new(fiber.clone()), Arc::new(base.clone())),
    )
    .with_covering(base))
}

/// `outer ∘ inner`.
pub fn compose_maps(outer: &MapHandle, inner: &MapHandle) -> Result<MapHandle> {
    if inner.target != outer.source {
        return Err(Error::ManifoldMismatch {
            expected: outer.source.to_string(),
            found: inner.target.to_string(),
        });
    }
    let composed = handle(
        format!("compose({},{})", outer.id, inner.id),
        inner.source.clone(),
        outer.target.clone(),
        MapKind::Compose {
            outer: Arc::new(outer.clone()),
            inner: Arc::new(inner.clone()),
        },
    );
    match (outer.base_map(), inner.base_map()) {
        (Some(bo), Some(bi)) => Ok(composed.with_covering(&compose_maps(bo, bi)?)),
        _ => Ok(composed),
    }
}

/// The total space of the pullback of `SU(3) → S⁵` along `base`.
pub fn pullback_total_space(base: &MapHandle) -> Result<ManifoldId> {
    if base.source != ManifoldId::S5 || base.target != ManifoldId::S5 {
        return Err(Error::ManifoldMismatch {
            expected: "a self-map of S5".into(),
            found: format!("{} -> {}", base.source, base.target),
        });
    }
    Ok(ManifoldId::Pullback(Arc::new(base.clone())))
}

/// `h(A) = (p(A), g(A))`, the factorization of `g` through the pullback
/// along `f`.
pub fn map_h() -> MapHandle {
    let target = pullback_total_space(&map_f()).expect("f is a self-map of S5");
    handle("h", ManifoldId::SU3, target, MapKind::IntoPullback)
        .with_covering(&identity(&ManifoldId::S5))
}

/// Projection `(S, T) ↦ T` of the pullback along `base` onto SU(3).
pub fn map_ftilde(base: &MapHandle) -> Result<MapHandle> {
    let source = pullback_total_space(base)?;
    Ok(handle(
        format!("ftilde[{}]", base.id),
        source,
        ManifoldId::SU3,
        MapKind::PullbackTotal,
    )
    .with_covering(base))
}

/// The bundle projection of a total space onto S⁵.
pub fn bundle_projection(m: &ManifoldId) -> Result<MapHandle> {
    match m {
        ManifoldId::SU3 => Ok(projection_p()),
        ManifoldId::S3xS5 => Ok(handle(
            "pr_s5",
            m.clone(),
            ManifoldId::S5,
            MapKind::ProductBase,
        )),
        ManifoldId::Pullback(b) => Ok(handle(
            format!("pr_s5[{}]", b.id),
            m.clone(),
            ManifoldId::S5,
            MapKind::PullbackBase,
        )),
        other => Err(Error::Unsupported(format!(
            "{other} is not a bundle over S5"
        ))),
    }
}

/// A fixed point of the fiber over `base_point` in the total space `m`,
/// chosen by pointwise completion. The product bundle uses the identity,
/// since its fiber is parametrized directly.
fn fiber_anchor(m: &ManifoldId, base_point: &[f64]) -> Result<CMat3<f64>> {
    let column = match m {
        ManifoldId::SU3 => base_point.to_vec(),
        ManifoldId::Pullback(b) => b.eval_ambient::<f64>(base_point)?,
        ManifoldId::S3xS5 => return Ok(crate::scalar::mat3_identity()),
        other => {
            return Err(Error::Unsupported(format!(
                "{other} is not a bundle over S5"
            )))
        }
    };
    let t = complete_to_su3(&cx3_from_ambient(&column));
    Ok(read_mat3(&manifold::mat_to_ambient(&t)))
}

/// Restriction of a bundle map to the fiber over `base_point`, as a map
/// `S³ → S³` between the fibers (identified with SU(2) by left translation).
pub fn fiber_restriction(phi: &MapHandle, base_point: &Point) -> Result<MapHandle> {
    let base = phi
        .base_map()
        .ok_or_else(|| Error::Unsupported(format!("{} is not a bundle map", phi.id)))?;
    let b = base_point.ambient();
    if b.len() != 6 {
        return Err(Error::ManifoldMismatch {
            expected: "S5".into(),
            found: format!("{} ambient coordinates", b.len()),
        });
    }
    let image = base.eval_ambient::<f64>(&b)?;
    let data = FiberData {
        total: Arc::new(phi.clone()),
        t0: fiber_anchor(&phi.source, &b)?,
        t1: fiber_anchor(&phi.target, &image)?,
        source_base: b,
    };
    Ok(handle(
        format!("fiber({})", phi.id),
        ManifoldId::S3,
        ManifoldId::S3,
        MapKind::Fiber(Arc::new(data)),
    ))
}

// ---------------------------------------------------------------------------
// point-level operations

pub fn eval_p(a: &Point) -> Result<Point> {
    projection_p().eval(a)
}

pub fn eval_f(x: &Point) -> Result<Point> {
    map_f().eval(x)
}

/// Evaluates the normalized `g` and checks that the output lies in SU(3).
pub fn eval_g(a: &Point) -> Result<Point> {
    let y = map_g().eval_ambient::<f64>(&a.ambient())?;
    let dev = deviation_ambient(&ManifoldId::SU3, &y);
    if dev > EPS_MEMBERSHIP {
        return Err(Error::InconsistentG(dev));
    }
    Point::from_ambient(&ManifoldId::SU3, &y)
}

/// Any `g` variant evaluated on a matrix, without membership checks.
pub fn eval_g_variant(a: &SU3Matrix, variant: GVariant) -> Result<SU3Matrix> {
    let m = read_mat3::<f64>(&manifold::mat_to_ambient(a));
    let g = g_formula(&m, variant)?;
    let mut out = Vec::with_capacity(18);
    write_mat3(&g, &mut out);
    Ok(mat_from_ambient(&out))
}

/// Full ambient Jacobian, one dual-number pass per ambient coordinate.
pub fn differential(phi: &MapHandle, x: &Point) -> Result<Differential> {
    let amb = x.ambient();
    let n = amb.len();
    let mut matrix = DMatrix::zeros(phi.target.ambient_dim(), n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = phi.push_forward(&amb, &e)?;
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    Ok(Differential {
        point: x.clone(),
        matrix,
    })
}

/// Central finite-difference Jacobian of the ambient extension.
pub fn finite_difference_jacobian(phi: &MapHandle, x: &Point, step: f64) -> Result<DMatrix<f64>> {
    let amb = x.ambient();
    let n = amb.len();
    let mut matrix = DMatrix::zeros(phi.target.ambient_dim(), n);
    for j in 0..n {
        let mut plus = amb.clone();
        let mut minus = amb.clone();
        plus[j] += step;
        minus[j] -= step;
        let fp = phi.eval_ambient::<f64>(&plus)?;
        let fm = phi.eval_ambient::<f64>(&minus)?;
        for i in 0..fp.len() {
            matrix[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(matrix)
}

/// Samples `trials` source points and checks `π∘φ = base∘π` within `tol`.
pub fn check_covers_with(phi: &MapHandle, seed: Seed, trials: usize, tol: f64) -> Result<bool> {
    let base = phi
        .base_map()
        .ok_or_else(|| Error::Unsupported(format!("{} carries no covering data", phi.id)))?;
    let src_proj = bundle_projection(&phi.source)?;
    let tgt_proj = bundle_projection(&phi.target)?;
    let mut rng = seed.rng();
    for _ in 0..trials {
        let x = manifold::sample_ambient(&phi.source, &mut rng);
        let Ok(y) = phi.eval_ambient::<f64>(&x) else {
            continue;
        };
        let lhs = tgt_proj.eval_ambient::<f64>(&y)?;
        let Ok(rhs) = base.eval_ambient::<f64>(&src_proj.eval_ambient::<f64>(&x)?) else {
            continue;
        };
        if manifold::ambient_distance(&lhs, &rhs) > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn check_covers(phi: &MapHandle) -> Result<bool> {
    check_covers_with(phi, Seed(0x5eed), 1000, 1e-9)
}

/// Resolves a map name. Atoms: `id_s3`, `id_s5`, `id_su3`, `id_s3xs5`,
/// `f`, `g`, `h`, `p`, `ftilde` (over `f`), `ftilde:<m>` (over `susp5:<m>`),
/// `su2pow:<k>`, `su3pow:<k>`, `susp3:<d>`, `susp5:<d>`. Combinators:
/// `compose(<outer>,<inner>)`, `product(<S3 map>,<S5 map>)`,
/// `ftilde[<S5 map>]`.
pub fn resolve_map(name: &str) -> Result<MapHandle> {
    let name = name.trim();
    let int = |s: &str| -> Result<i32> {
        s.parse::<i32>()
            .map_err(|_| Error::Parse(format!("expected an integer in `{name}`")))
    };
    if let Some(inner) = strip_call(name, "compose") {
        let (a, b) = split_args(inner)?;
        return compose_maps(&resolve_map(a)?, &resolve_map(b)?);
    }
    if let Some(inner) = strip_call(name, "product") {
        let (a, b) = split_args(inner)?;
        return product_map(&resolve_map(a)?, &resolve_map(b)?);
    }
    if let Some(inner) = name
        .strip_prefix("ftilde[")
        .and_then(|s| s.strip_suffix(']'))
    {
        return map_ftilde(&resolve_map(inner)?);
    }
    if let Some((head, arg)) = name.split_once(':') {
        return match head {
            "su2pow" => Ok(su2_power(int(arg)?)),
            "su3pow" => Ok(su3_power(int(arg)?)),
            "susp3" => suspension_power(3, int(arg)?),
            "susp5" => suspension_power(5, int(arg)?),
            "ftilde" => map_ftilde(&suspension_power(5, int(arg)?)?),
            _ => Err(Error::UnknownMap(name.to_string())),
        };
    }
    match name {
        "id_s3" => Ok(identity(&ManifoldId::S3)),
        "id_s5" => Ok(identity(&ManifoldId::S5)),
        "id_su3" => Ok(identity(&ManifoldId::SU3)),
        "id_s3xs5" => Ok(identity(&ManifoldId::S3xS5)),
        "f" => Ok(map_f()),
        "g" => Ok(map_g()),
        "h" => Ok(map_h()),
        "p" => Ok(projection_p()),
        "ftilde" => map_ftilde(&map_f()),
        _ => Err(Error::UnknownMap(name.to_string())),
    }
}

/// Resolves `s3`, `s5`, `su3`, `s3xs5`, or `pullback:<S5 map>`.
pub fn resolve_manifold(name: &str) -> Result<ManifoldId> {
    let lower = name.trim().to_ascii_lowercase();
    if let Some(base) = lower.strip_prefix("pullback:") {
        let map = resolve_map(base).map_err(|_| Error::UnknownMap(base.to_string()))?;
        return pullback_total_space(&map);
    }
    match lower.as_str() {
        "s3" => Ok(ManifoldId::S3),
        "s5" => Ok(ManifoldId::S5),
        "su3" => Ok(ManifoldId::SU3),
        "s3xs5" => Ok(ManifoldId::S3xS5),
        _ => Err(Error::UnknownManifold(name.to_string())),
    }
}

fn strip_call<'a>(name: &'a str, head: &str) -> Option<&'a str> {
    name.strip_prefix(head)?
        .strip_prefix('(')?
        .strip_suffix(')')
}

fn split_args(inner: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => return Ok((&inner[..i], &inner[i + 1..])),
            _ => {}
        }
    }
    Err(Error::Parse(format!("expected two arguments in `{inner}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{embed_su2, sample, Complex64};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn s5(u: Complex64, v: Complex64, w: Complex64) -> Point {
        Point::s5(u, v, w)
    }

    #[test]
    fn projection_examples() {
        let p = eval_p(&Point::SU3(SU3Matrix::identity())).unwrap();
        assert_eq!(p, s5(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        let d = SU3Matrix::from_diagonal(&nalgebra::Vector3::new(
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ));
        assert_eq!(eval_p(&Point::SU3(d)).unwrap(), p);
    }

    #[test]
    fn projection_is_invariant_under_the_fiber_action() {
        let mut rng = Seed(4).rng();
        for _ in 0..100 {
            let a = manifold::haar_su3(&mut rng);
            let u = manifold::haar_su2(&mut rng);
            let pa = eval_p(&Point::SU3(a)).unwrap();
            let pau = eval_p(&Point::SU3(a * u)).unwrap();
            assert!(manifold::chordal_distance(&pa, &pau) < 1e-14);
        }
    }

    #[test]
    fn f_examples() {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert_eq!(eval_f(&s5(z, z, one)).unwrap(), s5(z, z, one));
        let y = eval_f(&s5(z, z, c(0.0, 1.0))).unwrap();
        assert!(manifold::chordal_distance(&y, &s5(z, z, c(-1.0, 0.0))) < 1e-15);
        let y = eval_f(&s5(one, z, z)).unwrap();
        assert!(manifold::chordal_distance(&y, &s5(z, c(-1.0, 0.0), z)) < 1e-15);
    }

    #[test]
    fn g_at_identity_is_identity() {
        let g = eval_g(&Point::SU3(SU3Matrix::identity())).unwrap();
        assert!((g.as_su3().unwrap() - SU3Matrix::identity()).norm() < 1e-15);
        let raw = eval_g_variant(&SU3Matrix::identity(), GVariant::Unnormalized).unwrap();
        assert!((raw - SU3Matrix::identity()).norm() < 1e-15);
    }

    #[test]
    fn g_squares_the_embedded_su2() {
        let a = embed_su2(c(0.0, 1.0), c(0.0, 0.0));
        let g = eval_g(&Point::SU3(a)).unwrap();
        let expect = SU3Matrix::from_diagonal(&nalgebra::Vector3::new(
            c(-1.0, 0.0),
            c(-1.0, 0.0),
            c(1.0, 0.0),
        ));
        assert!((g.as_su3().unwrap() - expect).norm() < 1e-15);

        let mut rng = Seed(9).rng();
        for _ in 0..50 {
            let u = manifold::haar_su2(&mut rng);
            for variant in [GVariant::Normalized, GVariant::Unnormalized] {
                let g = eval_g_variant(&u, variant).unwrap();
                assert!((g - u * u).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unnormalized_entries_fail_to_be_unitary_off_the_base_fiber() {
        let mut rng = Seed(21).rng();
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let a = manifold::haar_su3(&mut rng);
            let g = eval_g_variant(&a, GVariant::Unnormalized).unwrap();
            let r2 = a[(0, 0)].norm_sqr() + a[(0, 1)].norm_sqr();
            // columns 1, 2 are scaled by r² = 1 − |u|²
            assert!((g.column(0).norm() - r2).abs() < 1e-12);
            worst = worst.max((g.adjoint() * g - SU3Matrix::identity()).norm());
        }
        assert!(worst > 0.1);
    }

    #[test]
    fn g_is_singular_where_the_first_row_is_on_the_third_axis() {
        let a = SU3Matrix::new(
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 0.0),
        );
        assert!(matches!(
            eval_g(&Point::SU3(a)),
            Err(Error::NonSmoothPoint(_))
        ));
    }

    #[test]
    fn corrupted_g_leaves_su3() {
        let mut rng = Seed(5).rng();
        let a = manifold::haar_su3(&mut rng);
        let g = eval_g_variant(&a, GVariant::CorruptedEntry).unwrap();
        assert!(deviation_ambient(&ManifoldId::SU3, &manifold::mat_to_ambient(&g)) > 1e-3);
    }

    #[test]
    fn su2_power_examples() {
        let sq = su2_power(2);
        let y = sq.eval(&Point::s3(c(0.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(manifold::chordal_distance(&y, &Point::s3(c(-1.0, 0.0), c(0.0, 0.0))) < 1e-15);
        let x = sample(&ManifoldId::S3, Seed(1));
        assert_eq!(su2_power(1).eval(&x).unwrap(), x);
        // negative powers invert
        let inv = su2_power(-1).eval(&x).unwrap();
        let Point::S3 { a, b } = x else {
            unreachable!()
        };
        let Point::S3 { a: ia, b: ib } = inv else {
            unreachable!()
        };
        let prod = embed_su2(a, b) * embed_su2(ia, ib);
        assert!((prod - SU3Matrix::identity()).norm() < 1e-14);
    }

    #[test]
    fn su2_power_matches_g_on_the_base_fiber() {
        let sq = su2_power(2);
        let mut rng = Seed(17).rng();
        for _ in 0..100 {
            let q = manifold::sample_ambient(&ManifoldId::S3, &mut rng);
            let y = sq.eval_ambient::<f64>(&q).unwrap();
            let u = embed_su2(c(q[0], q[1]), c(q[2], q[3]));
            let g = eval_g(&Point::SU3(u)).unwrap();
            let g = g.as_su3().unwrap();
            assert!((g[(0, 0)] - c(y[0], y[1])).norm() < 1e-12);
            assert!((g[(0, 1)] - c(y[2], y[3])).norm() < 1e-12);
        }
    }

    #[test]
    fn suspension_examples() {
        let x = sample(&ManifoldId::S5, Seed(2));
        assert_eq!(suspension_power(5, 1).unwrap().eval(&x).unwrap(), x);
        let r = suspension_power(5, -1).unwrap();
        let once = r.eval(&x).unwrap();
        assert_ne!(once, x);
        assert_eq!(r.eval(&once).unwrap(), x);
        let amb = x.ambient();
        let y = suspension_power(5, 3).unwrap().eval(&x).unwrap().ambient();
        assert!((y[0].hypot(y[1]) - amb[0].hypot(amb[1])).abs() < 1e-14);
        assert_eq!(&y[2..], &amb[2..]);
        assert!(suspension_power(4, 2).is_err());
    }

    #[test]
    fn suspension_is_non_smooth_at_the_pole_set() {
        let pole = [0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let m = suspension_power(5, 3).unwrap();
        assert!(matches!(
            m.eval_ambient::<f64>(&pole),
            Err(Error::NonSmoothPoint(_))
        ));
        assert!(suspension_power(5, -1)
            .unwrap()
            .eval_ambient::<f64>(&pole)
            .is_ok());
    }

    #[test]
    fn composition_and_products() {
        let x = sample(&ManifoldId::S5, Seed(8));
        let id = identity(&ManifoldId::S5);
        let f = map_f();
        let c1 = compose_maps(&id, &f).unwrap();
        assert_eq!(c1.eval(&x).unwrap(), f.eval(&x).unwrap());
        assert!(compose_maps(&map_g(), &f).is_err());
        let prod = product_map(&identity(&ManifoldId::S3), &id).unwrap();
        let y = sample(&ManifoldId::S3xS5, Seed(8));
        assert_eq!(prod.eval(&y).unwrap(), y);
        assert!(product_map(&f, &f).is_err());
    }

    #[test]
    fn h_and_ftilde_factor_g() {
        let h = map_h();
        let hi = h.eval(&Point::SU3(SU3Matrix::identity())).unwrap();
        let Point::Pullback { s, t } = &hi else {
            panic!()
        };
        assert_eq!(s[2], c(1.0, 0.0));
        assert!((t - SU3Matrix::identity()).norm() < 1e-15);
        let ft = map_ftilde(&map_f()).unwrap();
        let mut rng = Seed(3).rng();
        for _ in 0..200 {
            let a = Point::SU3(manifold::haar_su3(&mut rng));
            let via = ft.eval(&h.eval(&a).unwrap()).unwrap();
            let direct = eval_g(&a).unwrap();
            assert!(manifold::chordal_distance(&via, &direct) < 1e-12);
        }
    }

    #[test]
    fn differential_of_identity_is_identity() {
        let x = sample(&ManifoldId::SU3, Seed(1));
        let d = differential(&identity(&ManifoldId::SU3), &x).unwrap();
        assert_eq!(d.matrix, DMatrix::identity(18, 18));
    }

    #[test]
    fn differentials_match_finite_differences() {
        let cases = [
            (map_f(), Point::s5(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))),
            (map_g(), Point::SU3(SU3Matrix::identity())),
            (map_g(), sample(&ManifoldId::SU3, Seed(77))),
            (su3_power(3), sample(&ManifoldId::SU3, Seed(78))),
            (
                suspension_power(5, 3).unwrap(),
                sample(&ManifoldId::S5, Seed(79)),
            ),
        ];
        for (m, x) in cases {
            let ad = differential(&m, &x).unwrap().matrix;
            let fd = finite_difference_jacobian(&m, &x, 1e-6).unwrap();
            let err = (ad - fd).abs().max();
            assert!(err < 1e-5, "{}: {err:e}", m.id);
        }
    }

    #[test]
    fn covering_checks() {
        assert!(check_covers(&map_g()).unwrap());
        assert!(check_covers(&map_h()).unwrap());
        assert!(check_covers(&map_ftilde(&map_f()).unwrap()).unwrap());
        let false_claim = su3_power(2).with_covering(&map_f());
        assert!(!check_covers(&false_claim).unwrap());
        assert!(check_covers(&su3_power(2)).is_err());
    }

    #[test]
    fn name_resolution() {
        assert_eq!(resolve_map("g").unwrap().id, "g");
        assert_eq!(resolve_map("ftilde:3").unwrap().id, "ftilde[susp5:3]");
        let m = resolve_map("compose(g,su3pow:3)").unwrap();
        assert_eq!(
            (m.source.clone(), m.target.clone()),
            (ManifoldId::SU3, ManifoldId::SU3)
        );
        let p = resolve_map("product(su2pow:2,susp5:-1)").unwrap();
        assert_eq!(p.source, ManifoldId::S3xS5);
        assert!(matches!(resolve_map("nope"), Err(Error::UnknownMap(_))));
        assert!(resolve_map("compose(g,f)").is_err());
        assert_eq!(resolve_manifold("SU3").unwrap(), ManifoldId::SU3);
        assert!(matches!(
            resolve_manifold("pullback:zzz"),
            Err(Error::UnknownMap(_))
        ));
        assert_eq!(
            resolve_manifold("pullback:f").unwrap().to_string(),
            "Pullback(f)"
        );
    }
}
