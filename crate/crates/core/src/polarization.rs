//! Polarization geometry: the frame rotation `Ξ(k)` taking `k` to the positive
//! third axis, and the compensating rotation `M = Ξ(Rk) R Ξ(k)ᵀ` about that
//! axis.
//!
//! With `ρ = √(k₂² + k₃²)`:
//!
//! ```text
//! cos α = k₃/ρ,  sin α = k₂/ρ,  cos β = ρ/|k|,  sin β = k₁/|k|
//!
//!       ⎛ cos β   −sin α sin β   −cos α sin β ⎞
//! Ξ  =  ⎜ 0        cos α         −sin α       ⎟
//!       ⎝ sin β    sin α cos β    cos α cos β ⎠
//! ```
//!
//! On the ray `k₂ = k₃ = 0` the angle `α` is undefined and taken to be 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeRotation;
use crate::{Mat3, Vec3};

/// Tolerance for accepting a matrix as a proper rotation.
pub const ROTATION_TOL: f64 = 1e-10;

/// Below this `cos β · cos β′` the closed-form angle is not reported.
pub const CLOSED_FORM_MIN: f64 = 1e-8;

/// Fails unless `RᵀR = I` and `det R = 1` within [`ROTATION_TOL`].
pub fn check_rotation(r: &Mat3) -> Result<()> {
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("rotation matrix"));
    }
    let residual = (r.transpose() * r - Mat3::identity()).abs().max();
    let det = r.determinant();
    if residual > ROTATION_TOL || (det - 1.0).abs() > ROTATION_TOL {
        return Err(Error::NotARotation { residual, det });
    }
    Ok(())
}

/// Rotation about the third axis by `theta`.
pub fn rotation_z(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Frame angles `(cos α, sin α, cos β, sin β)`.
fn angles(k: &Vec3) -> (f64, f64, f64, f64) {
    let norm = k.norm();
    let rho = k.y.hypot(k.z);
    let (ca, sa) = if rho == 0.0 { (1.0, 0.0) } else { (k.z / rho, k.y / rho) };
    (ca, sa, rho / norm, k.x / norm)
}

/// `Ξ(k)` together with the polarization vectors `ε^H` (row 1) and `ε^V` (row 2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationFrame {
    pub xi: Mat3,
    pub eps_h: Vec3,
    pub eps_v: Vec3,
    pub k: Vec3,
}

impl PolarizationFrame {
    pub fn new(k: &Vec3) -> Result<Self> {
        xi_matrix(k)
    }

    /// Unit vector `k/|k|`, which is row 3 of `Ξ`.
    pub fn direction(&self) -> Vec3 {
        self.xi.row(2).transpose()
    }

    /// Entries of `Ξ` in row-major order.
    pub fn to_row_major(&self) -> [f64; 9] {
        let x = &self.xi;
        [x[(0, 0)], x[(0, 1)], x[(0, 2)], x[(1, 0)], x[(1, 1)], x[(1, 2)], x[(2, 0)], x[(2, 1)], x[(2, 2)]]
    }
}

pub fn xi_matrix(k: &Vec3) -> Result<PolarizationFrame> {
    if k.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("wave vector"));
    }
    if k.norm() == 0.0 {
        return Err(Error::ZeroWaveVector { node: None });
    }
    let (ca, sa, cb, sb) = angles(k);
    #[rustfmt::skip]
    let xi = Mat3::new(
        cb, -sa * sb, -ca * sb,
        0.0, ca, -sa,
        sb, sa * cb, ca * cb,
    );
    Ok(PolarizationFrame { xi, eps_h: xi.row(0).transpose(), eps_v: xi.row(1).transpose(), k: *k })
}

/// `M = Ξ(Rk) R Ξ(k)ᵀ`, a rotation about the third axis by `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensatingRotation {
    pub m: Mat3,
    pub gamma: f64,
    /// `(cos γ, sin γ)` from the explicit angle formulas, absent when
    /// `cos β cos β′` is too small for them to be evaluated.
    pub closed_form: Option<(f64, f64)>,
}

impl CompensatingRotation {
    /// Mode map `b_H = M₁₁ a_H + M₁₂ a_V`, `b_V = M₂₁ a_H + M₂₂ a_V`.
    pub fn mode_rotation(&self) -> ModeRotation {
        ModeRotation::new(self.gamma)
    }

    /// Largest deviation of row 3 and column 3 from `e₃`.
    pub fn axis_residual(&self) -> f64 {
        let m = &self.m;
        [m[(0, 2)], m[(1, 2)], m[(2, 0)], m[(2, 1)], m[(2, 2)] - 1.0].iter().fold(0.0f64, |a, x| a.max(x.abs()))
    }
}

pub fn compensating_rotation(r: &Mat3, k: &Vec3) -> Result<CompensatingRotation> {
    check_rotation(r)?;
    let rk = r * k;
    let f = xi_matrix(k)?;
    let fr = xi_matrix(&rk)?;
    let m = fr.xi * r * f.xi.transpose();
    let gamma = m[(1, 0)].atan2(m[(0, 0)]);

    let (ca, sa, cb, sb) = angles(k);
    let (_, _, cbp, sbp) = angles(&rk);
    let closed_form = (cb * cbp > CLOSED_FORM_MIN).then(|| {
        let cos_g = (r[(0, 0)] - sb * sbp) / (cb * cbp);
        let sin_g = -(r[(0, 1)] * ca - r[(0, 2)] * sa) / cbp;
        (cos_g, sin_g)
    });
    Ok(CompensatingRotation { m, gamma, closed_form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Rotation3, Unit};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn assert_mat(a: &Mat3, b: &Mat3, tol: f64) {
        assert!((a - b).abs().max() <= tol, "{a} vs {b}");
    }

    #[test]
    fn frame_examples() {
        let f = xi_matrix(&Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert_mat(&f.xi, &Mat3::identity(), 0.0);

        let f = xi_matrix(&Vec3::y()).unwrap();
        assert_mat(&f.xi, &Mat3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0), 1e-16);
        assert!((f.xi * Vec3::y() - Vec3::z()).norm() < 1e-16);

        let f = xi_matrix(&Vec3::x()).unwrap();
        assert_mat(&f.xi, &Mat3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0), 1e-16);
        assert!((f.xi * Vec3::x() - Vec3::z()).norm() < 1e-16);
        assert_eq!(f.eps_h, Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(f.to_row_major()[6], 1.0);

        assert!(matches!(xi_matrix(&Vec3::zeros()), Err(Error::ZeroWaveVector { .. })));
    }

    #[test]
    fn negative_first_component_keeps_cos_beta_positive() {
        let f = xi_matrix(&Vec3::new(-3.0, 0.0, 4.0)).unwrap();
        assert!((f.xi[(0, 0)] - 0.8).abs() < 1e-15);
        assert!((f.xi[(2, 0)] + 0.6).abs() < 1e-15);
    }

    #[test]
    fn compensating_examples() {
        let k = Vec3::new(0.3, -0.2, 0.9);
        let c = compensating_rotation(&Mat3::identity(), &k).unwrap();
        assert_mat(&c.m, &Mat3::identity(), 1e-15);
        assert!(c.gamma.abs() < 1e-15);

        let r = rotation_z(0.7);
        let c = compensating_rotation(&r, &Vec3::z()).unwrap();
        assert!((c.gamma - 0.7).abs() < 1e-15);
        assert_mat(&c.m, &r, 1e-15);

        assert!(compensating_rotation(&(Mat3::identity() * -1.0), &k).is_err());
    }

    #[test]
    fn closed_form_absent_when_image_on_first_axis() {
        let r = *Rotation3::rotation_between(&Vec3::z(), &Vec3::x()).unwrap().matrix();
        let c = compensating_rotation(&r, &Vec3::z()).unwrap();
        assert!(c.closed_form.is_none());
        assert!(c.axis_residual() < 1e-15);
    }

    fn vec3() -> impl Strategy<Value = Vec3> {
        (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64)
            .prop_map(|(a, b, c)| Vec3::new(a, b, c))
            .prop_filter("nonzero", |k| k.norm() > 1e-3)
    }

    fn rotation() -> impl Strategy<Value = Mat3> {
        (vec3(), -PI..PI)
            .prop_map(|(axis, angle)| *Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle).matrix())
    }

    proptest! {
        #[test]
        fn frame_is_rotation_sending_k_to_axis(k in vec3()) {
            let f = xi_matrix(&k).unwrap();
            prop_assert!((f.xi * k - Vec3::z() * k.norm()).norm() <= 1e-12 * (1.0 + k.norm()));
            prop_assert!((f.xi.transpose() * f.xi - Mat3::identity()).abs().max() <= 1e-12);
            prop_assert!((f.xi.determinant() - 1.0).abs() <= 1e-12);
            prop_assert!(k.dot(&f.eps_h).abs() <= 1e-12 * k.norm());
            prop_assert!(k.dot(&f.eps_v).abs() <= 1e-12 * k.norm());
            prop_assert!((f.eps_h.cross(&f.eps_v) - k / k.norm()).norm() <= 1e-12);
        }

        #[test]
        fn compensating_rotation_about_third_axis(r in rotation(), k in vec3()) {
            let c = compensating_rotation(&r, &k).unwrap();
            prop_assert!(c.axis_residual() <= 1e-10);
            let (s, co) = c.gamma.sin_cos();
            prop_assert!((c.m[(0, 0)] - co).abs() <= 1e-12 && (c.m[(1, 0)] - s).abs() <= 1e-12);
            prop_assert!((c.m[(0, 1)] + s).abs() <= 1e-12 && (c.m[(1, 1)] - co).abs() <= 1e-12);
            if let Some((cg, sg)) = c.closed_form {
                let (_, _, cb, _) = angles(&k);
                let (_, _, cbp, _) = angles(&(r * k));
                // closed forms divide by cos β cos β′; accuracy degrades accordingly
                let tol = 1e-12 / (cb * cbp);
                prop_assert!((cg - co).abs() <= tol, "{} vs {}", cg, co);
                prop_assert!((sg - s).abs() <= tol, "{} vs {}", sg, s);
            }
            let v = Vec3::new(0.4, -1.3, 0.0);
            prop_assert!(((c.m * v).norm() - v.norm()).abs() <= 1e-12);
        }
    }
}
