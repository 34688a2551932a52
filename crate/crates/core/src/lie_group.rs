//! Concrete structure groups: the circle, k-tori, irrational tori, SO(3)
//! and GL(n).
//!
//! Elements of the abelian kinds are stored as angles or real lifts; the
//! matrix kinds share one dense-matrix representation so SO(3) and GL(n)
//! run through identical code paths.  Irrational-torus elements are real
//! lifts that are *never* reduced: equality is decided by a bounded
//! lattice search, and holonomy periods stay readable as lifts.
//!
//! Sign convention, fixed here once and inherited everywhere: group
//! curves integrate the right-translation equation `g' = xi(t) g` with
//! `g(0) = e`, and the join action right-multiplies by the inverse.

use nalgebra::DMatrix;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Default tolerance for deciding group-element equality.
pub const GROUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupSpec {
    CircleU1,
    TorusK { dim: usize },
    IrrationalTorus { alpha: f64, lattice_bound: i64 },
    SO3,
    GLn { dim: usize },
}

/// Element of a concrete group, representation depending on the kind.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    /// Circle angle, canonical in `[0, 2*pi)`.
    Angle(f64),
    /// Torus angles, each canonical in `[0, 2*pi)`.
    Angles(Vec<f64>),
    /// Irrational-torus real lift, never reduced.
    Lift(f64),
    /// SO(3) or GL(n) matrix.
    Matrix(DMatrix<f64>),
}

/// Tangent/algebra data: a real for the one-dimensional abelian kinds, a
/// vector for tori, a matrix for the matrix kinds.  Used both for
/// elements of the Lie algebra and for ambient tangents at a group point.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraElement {
    Scalar(f64),
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

/// Result of the bounded lattice equality search on an irrational torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusEquality {
    /// `x - y = m + n*alpha` for the returned witness.
    Equal { m: i64, n: i64 },
    NotEqualWithinBound,
}

/// Sampled solution of the group ODE `g' = xi(t) g` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct GroupCurve {
    pub times: Vec<f64>,
    pub points: Vec<GroupElement>,
    /// Accumulated integrals of `xi` for the abelian kinds (per coordinate),
    /// recording the lifts behind the canonical angles.
    pub lifts: Option<Vec<Vec<f64>>>,
}

impl GroupCurve {
    pub fn end(&self) -> &GroupElement {
        self.points.last().expect("curve has at least one sample")
    }
}

pub fn canonical_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can return exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two circle angles along the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

impl GroupSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            GroupSpec::CircleU1 => "CircleU1",
            GroupSpec::TorusK { .. } => "TorusK",
            GroupSpec::IrrationalTorus { .. } => "IrrationalTorus",
            GroupSpec::SO3 => "SO3",
            GroupSpec::GLn { .. } => "GLn",
        }
    }

    pub fn is_abelian(&self) -> bool {
        !matches!(self, GroupSpec::SO3 | GroupSpec::GLn { .. })
    }

    /// Dimension of the algebra data (coordinates for abelian kinds,
    /// matrix side length for matrix kinds).
    pub fn algebra_dim(&self) -> usize {
        match self {
            GroupSpec::CircleU1 | GroupSpec::IrrationalTorus { .. } => 1,
            GroupSpec::TorusK { dim } => *dim,
            GroupSpec::SO3 => 3,
            GroupSpec::GLn { dim } => *dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GroupSpec::TorusK { dim } | GroupSpec::GLn { dim } if *dim < 1 => Err(
                Error::InvalidParameter("dimension must be at least 1".into()),
            ),
            GroupSpec::IrrationalTorus { lattice_bound, .. } if *lattice_bound < 1 => Err(
                Error::InvalidParameter("lattice bound must be at least 1".into()),
            ),
            _ => Ok(()),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupSpec::CircleU1 => GroupElement::Angle(0.0),
            GroupSpec::TorusK { dim } => GroupElement::Angles(vec![0.0; *dim]),
            GroupSpec::IrrationalTorus { .. } => GroupElement::Lift(0.0),
            GroupSpec::SO3 => GroupElement::Matrix(DMatrix::identity(3, 3)),
            GroupSpec::GLn { dim } => GroupElement::Matrix(DMatrix::identity(*dim, *dim)),
        }
    }

    pub fn zero_algebra(&self) -> AlgebraElement {
        match self {
            GroupSpec::CircleU1 | GroupSpec::IrrationalTorus { .. } => AlgebraElement::Scalar(0.0),
            GroupSpec::TorusK { dim } => AlgebraElement::Vector(vec![0.0; *dim]),
            GroupSpec::SO3 => AlgebraElement::Matrix(DMatrix::zeros(3, 3)),
            GroupSpec::GLn { dim } => AlgebraElement::Matrix(DMatrix::zeros(*dim, *dim)),
        }
    }

    fn check(&self, a: &GroupElement) -> Result<()> {
        let ok = matches!(
            (self, a),
            (GroupSpec::CircleU1, GroupElement::Angle(_))
                | (GroupSpec::IrrationalTorus { .. }, GroupElement::Lift(_))
        ) || match (self, a) {
            (GroupSpec::TorusK { dim }, GroupElement::Angles(v)) => v.len() == *dim,
            (GroupSpec::SO3, GroupElement::Matrix(m)) => m.nrows() == 3 && m.ncols() == 3,
            (GroupSpec::GLn { dim }, GroupElement::Matrix(m)) => {
                m.nrows() == *dim && m.ncols() == *dim
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::KindMismatch(format!(
                "element {a:?} does not belong to {}",
                self.kind_name()
            )))
        }
    }

    fn check_algebra(&self, xi: &AlgebraElement) -> Result<()> {
        let ok = match (self, xi) {
            (GroupSpec::CircleU1 | GroupSpec::IrrationalTorus { .. }, AlgebraElement::Scalar(_)) => {
                true
            }
            (GroupSpec::TorusK { dim }, AlgebraElement::Vector(v)) => v.len() == *dim,
            (GroupSpec::SO3, AlgebraElement::Matrix(m)) => m.nrows() == 3 && m.ncols() == 3,
            (GroupSpec::GLn { dim }, AlgebraElement::Matrix(m)) => {
                m.nrows() == *dim && m.ncols() == *dim
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::KindMismatch(format!(
                "algebra element {xi:?} does not belong to {}",
                self.kind_name()
            )))
        }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Angle(x), GroupElement::Angle(y)) => {
                GroupElement::Angle(canonical_angle(x + y))
            }
            (GroupElement::Angles(x), GroupElement::Angles(y)) => GroupElement::Angles(
                x.iter()
                    .zip(y)
                    .map(|(a, b)| canonical_angle(a + b))
                    .collect(),
            ),
            (GroupElement::Lift(x), GroupElement::Lift(y)) => GroupElement::Lift(x + y),
            (GroupElement::Matrix(x), GroupElement::Matrix(y)) => GroupElement::Matrix(x * y),
            _ => unreachable!("check() filtered mismatches"),
        })
    }

    pub fn inv(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match a {
            GroupElement::Angle(x) => GroupElement::Angle(canonical_angle(-x)),
            GroupElement::Angles(x) => {
                GroupElement::Angles(x.iter().map(|a| canonical_angle(-a)).collect())
            }
            GroupElement::Lift(x) => GroupElement::Lift(-x),
            GroupElement::Matrix(m) => {
                if matches!(self, GroupSpec::SO3) {
                    GroupElement::Matrix(m.transpose())
                } else {
                    let det = m.clone().determinant();
                    if det.abs() <= 1e-12 {
                        return Err(Error::InvalidParameter(format!(
                            "matrix is singular (det = {det:e})"
                        )));
                    }
                    GroupElement::Matrix(m.clone().try_inverse().ok_or_else(|| {
                        Error::InvalidParameter("matrix inversion failed".into())
                    })?)
                }
            }
        })
    }

    /// Maurer-Cartan form: sends an ambient tangent `v` at `g` to the
    /// algebra.  Matrix kinds compute `g^{-1} v`; abelian kinds are the
    /// identity on the coordinates.
    pub fn maurer_cartan(&self, g: &GroupElement, v: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(g)?;
        self.check_algebra(v)?;
        match (g, v) {
            (GroupElement::Matrix(_), AlgebraElement::Matrix(m)) => {
                let g_inv = match self.inv(g)? {
                    GroupElement::Matrix(m) => m,
                    _ => unreachable!(),
                };
                Ok(AlgebraElement::Matrix(g_inv * m))
            }
            _ => Ok(v.clone()),
        }
    }

    /// Adjoint action of `g` on the algebra: `g xi g^{-1}` for matrix
    /// kinds, the identity for abelian kinds.
    pub fn adjoint(&self, g: &GroupElement, xi: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(g)?;
        self.check_algebra(xi)?;
        match (g, xi) {
            (GroupElement::Matrix(gm), AlgebraElement::Matrix(x)) => {
                let g_inv = match self.inv(g)? {
                    GroupElement::Matrix(m) => m,
                    _ => unreachable!(),
                };
                Ok(AlgebraElement::Matrix(gm * x * g_inv))
            }
            _ => Ok(xi.clone()),
        }
    }

    /// Decides whether two lifts represent the same irrational-torus
    /// element, searching the lattice exhaustively within the bound.
    pub fn torus_alpha_equal(&self, x: f64, y: f64) -> Result<TorusEquality> {
        let (alpha, bound) = match self {
            GroupSpec::IrrationalTorus {
                alpha,
                lattice_bound,
            } => (*alpha, *lattice_bound),
            _ => {
                return Err(Error::UnsupportedGroup(
                    "lattice equality only applies to the irrational torus".into(),
                ))
            }
        };
        let d = x - y;
        for m in -bound..=bound {
            for n in -bound..=bound {
                if (d - m as f64 - n as f64 * alpha).abs() <= GROUP_TOL {
                    return Ok(TorusEquality::Equal { m, n });
                }
            }
        }
        Ok(TorusEquality::NotEqualWithinBound)
    }

    /// Distance between elements in a kind-appropriate metric.  For the
    /// irrational torus this is the best lattice residual within the bound.
    pub fn distance(&self, a: &GroupElement, b: &GroupElement) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Angle(x), GroupElement::Angle(y)) => angle_distance(*x, *y),
            (GroupElement::Angles(x), GroupElement::Angles(y)) => x
                .iter()
                .zip(y)
                .map(|(a, b)| angle_distance(*a, *b))
                .fold(0.0, f64::max),
            (GroupElement::Lift(x), GroupElement::Lift(y)) => {
                let (alpha, bound) = match self {
                    GroupSpec::IrrationalTorus {
                        alpha,
                        lattice_bound,
                    } => (*alpha, *lattice_bound),
                    _ => unreachable!(),
                };
                let d = x - y;
                let mut best = f64::INFINITY;
                for m in -bound..=bound {
                    for n in -bound..=bound {
                        best = best.min((d - m as f64 - n as f64 * alpha).abs());
                    }
                }
                best
            }
            (GroupElement::Matrix(x), GroupElement::Matrix(y)) => (x - y).amax(),
            _ => unreachable!(),
        })
    }

    pub fn equal(&self, a: &GroupElement, b: &GroupElement, tol: f64) -> Result<bool> {
        Ok(self.distance(a, b)? <= tol)
    }

    /// Norm of an algebra element (sup norm on coordinates or entries).
    pub fn algebra_norm(&self, xi: &AlgebraElement) -> f64 {
        match xi {
            AlgebraElement::Scalar(x) => x.abs(),
            AlgebraElement::Vector(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            AlgebraElement::Matrix(m) => m.amax(),
        }
    }

    pub fn algebra_add(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        match (a, b) {
            (AlgebraElement::Scalar(x), AlgebraElement::Scalar(y)) => {
                AlgebraElement::Scalar(x + y)
            }
            (AlgebraElement::Vector(x), AlgebraElement::Vector(y)) => {
                AlgebraElement::Vector(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (AlgebraElement::Matrix(x), AlgebraElement::Matrix(y)) => {
                AlgebraElement::Matrix(x + y)
            }
            _ => panic!("algebra shape mismatch"),
        }
    }

    pub fn algebra_scale(&self, c: f64, a: &AlgebraElement) -> AlgebraElement {
        match a {
            AlgebraElement::Scalar(x) => AlgebraElement::Scalar(c * x),
            AlgebraElement::Vector(v) => AlgebraElement::Vector(v.iter().map(|x| c * x).collect()),
            AlgebraElement::Matrix(m) => AlgebraElement::Matrix(m * c),
        }
    }

    /// Commutator `[a, b]`; zero for the abelian kinds.
    pub fn bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> AlgebraElement {
        match (a, b) {
            (AlgebraElement::Matrix(x), AlgebraElement::Matrix(y)) => {
                AlgebraElement::Matrix(x * y - y * x)
            }
            _ => self.zero_algebra(),
        }
    }

    /// Integrates `g' = xi(t) g`, `g(0) = e`, over `[0, 1]` and returns
    /// samples at the step grid.
    ///
    /// Matrix kinds use a fourth-order commutator-corrected two-node
    /// Gauss rule per step, exponentiated in closed form (Rodrigues for
    /// SO(3), scaling-and-squaring Pade otherwise).  Abelian kinds
    /// accumulate the integral of `xi` by composite Simpson, which is
    /// also fourth order.
    pub fn exp_curve<F>(&self, xi: F, steps: usize) -> Result<GroupCurve>
    where
        F: Fn(f64) -> AlgebraElement,
    {
        if steps < 1 {
            return Err(Error::InvalidParameter("steps must be at least 1".into()));
        }
        let sample = |t: f64| -> Result<AlgebraElement> {
            let v = xi(t);
            self.check_algebra(&v)?;
            if !self.algebra_finite(&v) {
                return Err(Error::NonFinite(format!("xi({t})")));
            }
            Ok(v)
        };
        let h = 1.0 / steps as f64;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();

        if self.is_abelian() {
            let dim = self.algebra_dim();
            let mut lift = vec![0.0; dim];
            let mut lifts = vec![lift.clone()];
            let mut points = vec![self.identity()];
            for k in 0..steps {
                let t0 = times[k];
                let f0 = to_vec(&sample(t0)?);
                let fm = to_vec(&sample(t0 + 0.5 * h)?);
                let f1 = to_vec(&sample(t0 + h)?);
                for i in 0..dim {
                    lift[i] += h / 6.0 * (f0[i] + 4.0 * fm[i] + f1[i]);
                }
                lifts.push(lift.clone());
                points.push(self.element_from_lift(&lift));
            }
            return Ok(GroupCurve {
                times,
                points,
                lifts: Some(lifts),
            });
        }

        // Matrix kinds: fourth-order two-node Gauss rule with the
        // commutator correction, applied as g <- exp(Omega) g.
        const GAUSS_OFF: f64 = 0.288_675_134_594_812_9; // sqrt(3)/6
        let mut g = DMatrix::identity(self.algebra_dim(), self.algebra_dim());
        let mut points = vec![GroupElement::Matrix(g.clone())];
        for k in 0..steps {
            let t0 = times[k];
            let a1 = to_mat(&sample(t0 + (0.5 - GAUSS_OFF) * h)?);
            let a2 = to_mat(&sample(t0 + (0.5 + GAUSS_OFF) * h)?);
            let omega = (&a1 + &a2) * (h / 2.0)
                - (&a1 * &a2 - &a2 * &a1) * (3f64.sqrt() * h * h / 12.0);
            g = self.exp_matrix(&omega) * g;
            points.push(GroupElement::Matrix(g.clone()));
        }
        Ok(GroupCurve {
            times,
            points,
            lifts: None,
        })
    }

    /// One integration step of `g' = xi(t) g` from `t` over a signed step
    /// `h`, starting at `g`.  Shared by `exp_curve` and the horizontal
    /// lift.
    pub fn flow_step<F>(&self, g: &GroupElement, xi: &F, t: f64, h: f64) -> Result<GroupElement>
    where
        F: Fn(f64) -> Result<AlgebraElement>,
    {
        const GAUSS_OFF: f64 = 0.288_675_134_594_812_9;
        match g {
            GroupElement::Matrix(gm) => {
                let a1 = to_mat(&xi(t + (0.5 - GAUSS_OFF) * h)?);
                let a2 = to_mat(&xi(t + (0.5 + GAUSS_OFF) * h)?);
                let omega = (&a1 + &a2) * (h / 2.0)
                    - (&a1 * &a2 - &a2 * &a1) * (3f64.sqrt() * h * h / 12.0);
                Ok(GroupElement::Matrix(self.exp_matrix(&omega) * gm))
            }
            _ => {
                let f0 = to_vec(&xi(t)?);
                let fm = to_vec(&xi(t + 0.5 * h)?);
                let f1 = to_vec(&xi(t + h)?);
                let lift: Vec<f64> = (0..f0.len())
                    .map(|i| h / 6.0 * (f0[i] + 4.0 * fm[i] + f1[i]))
                    .collect();
                self.mul(g, &self.element_from_lift(&lift))
            }
        }
    }

    /// Builds an element from abelian lift coordinates.
    pub fn element_from_lift(&self, lift: &[f64]) -> GroupElement {
        match self {
            GroupSpec::CircleU1 => GroupElement::Angle(canonical_angle(lift[0])),
            GroupSpec::TorusK { .. } => {
                GroupElement::Angles(lift.iter().map(|&a| canonical_angle(a)).collect())
            }
            GroupSpec::IrrationalTorus { .. } => GroupElement::Lift(lift[0]),
            _ => panic!("element_from_lift on a matrix kind"),
        }
    }

    fn algebra_finite(&self, xi: &AlgebraElement) -> bool {
        match xi {
            AlgebraElement::Scalar(x) => x.is_finite(),
            AlgebraElement::Vector(v) => v.iter().all(|x| x.is_finite()),
            AlgebraElement::Matrix(m) => m.iter().all(|x| x.is_finite()),
        }
    }

    /// Matrix exponential: Rodrigues for 3x3 skew input under SO(3),
    /// scaling-and-squaring Pade otherwise.
    pub fn exp_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        if matches!(self, GroupSpec::SO3) {
            return rodrigues(a);
        }
        pade_exp(a)
    }
}

fn to_vec(xi: &AlgebraElement) -> Vec<f64> {
    match xi {
        AlgebraElement::Scalar(x) => vec![*x],
        AlgebraElement::Vector(v) => v.clone(),
        AlgebraElement::Matrix(_) => panic!("expected abelian algebra data"),
    }
}

fn to_mat(xi: &AlgebraElement) -> DMatrix<f64> {
    match xi {
        AlgebraElement::Matrix(m) => m.clone(),
        _ => panic!("expected matrix algebra data"),
    }
}

/// Skew generator of rotations about a coordinate axis (0 = x, 1 = y, 2 = z).
pub fn so3_generator(axis: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(3, 3);
    match axis {
        0 => {
            k[(2, 1)] = 1.0;
            k[(1, 2)] = -1.0;
        }
        1 => {
            k[(0, 2)] = 1.0;
            k[(2, 0)] = -1.0;
        }
        2 => {
            k[(1, 0)] = 1.0;
            k[(0, 1)] = -1.0;
        }
        _ => panic!("axis must be 0, 1 or 2"),
    }
    k
}

/// Rotation by `angle` about a coordinate axis, in closed form.
pub fn so3_rotation(axis: usize, angle: f64) -> DMatrix<f64> {
    rodrigues(&(so3_generator(axis) * angle))
}

/// Closed-form exponential of a 3x3 skew matrix.
pub fn rodrigues(skew: &DMatrix<f64>) -> DMatrix<f64> {
    let (wx, wy, wz) = (skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]);
    let theta = (wx * wx + wy * wy + wz * wz).sqrt();
    let eye = DMatrix::identity(3, 3);
    let (a, b) = if theta < 1e-8 {
        // Series fallback near the identity.
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    eye + skew * a + skew * skew * b
}

/// Scaling-and-squaring Pade(6) matrix exponential.
pub fn pade_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.amax();
    let squarings = if norm > 0.5 {
        ((norm / 0.5).log2().ceil() as i32).max(0) as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);

    // Pade(6) coefficients for exp.
    const C: [f64; 7] = [1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0];
    let eye = DMatrix::identity(n, n);
    let mut term = eye.clone();
    let mut p = &eye * C[0];
    let mut q = &eye * C[0];
    for (k, &c) in C.iter().enumerate().skip(1) {
        term = &term * &scaled;
        p += &term * c;
        if k % 2 == 0 {
            q += &term * c;
        } else {
            q -= &term * c;
        }
    }
    let mut result = q
        .lu()
        .solve(&p)
        .expect("Pade denominator is well conditioned after scaling");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
