//! Wave-vector space: quadrature grids, profiles and per-node state fields.

mod grid;
pub mod rules;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use grid::{ComplexDoc, GridDoc, GridKind, GridParameters, KGrid, NodeDoc};

use crate::error::{Error, Result};
use crate::fock::{self, FockState1, FockState2, FockVector, LadderOp, OpExpr};
use crate::{exec, Vec3};

/// `N(k) = √((2π)³ · 2|k|)`.
pub fn normalization_factor(k: &Vec3) -> Result<f64> {
    let r = k.norm();
    if r == 0.0 {
        return Err(Error::ZeroWaveVector { node: None });
    }
    Ok(((2.0 * PI).powi(3) * 2.0 * r).sqrt())
}

/// `N(k)` for nodes already known to be nonzero.
pub(crate) fn norm_factor(k: &Vec3) -> f64 {
    ((2.0 * PI).powi(3) * 2.0 * k.norm()).sqrt()
}

/// Physical constants. Defaults are natural units with everything set to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub c: f64,
    pub epsilon0: f64,
    /// Unit length making the fields dimensionless.
    pub l: f64,
    /// Dimension-carrying prefactor of the vector potential.
    pub lambda: f64,
    /// Elementary charge.
    pub q_el: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

impl PhysicalConstants {
    pub const fn natural() -> Self {
        Self { hbar: 1.0, c: 1.0, epsilon0: 1.0, l: 1.0, lambda: 1.0, q_el: 1.0 }
    }

    /// CODATA 2018 values in SI units, `l = 1 m`, `λ = 1`.
    pub const fn si() -> Self {
        Self {
            hbar: 1.054_571_817e-34,
            c: 299_792_458.0,
            epsilon0: 8.854_187_812_8e-12,
            l: 1.0,
            lambda: 1.0,
            q_el: 1.602_176_634e-19,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("hbar", self.hbar),
            ("c", self.c),
            ("epsilon0", self.epsilon0),
            ("l", self.l),
            ("lambda", self.lambda),
            ("q_el", self.q_el),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::NonPositive { name, value });
            }
        }
        Ok(())
    }

    /// Fine-structure constant `q²/(4π ε₀ ħ c)`.
    pub fn alpha(&self) -> f64 {
        self.q_el * self.q_el / (4.0 * PI * self.epsilon0 * self.hbar * self.c)
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

/// Values tabulated on the nodes of a grid: a complex amplitude per node
/// (scalar) or a `[H, V]` pair per node (photon).
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<V> {
    grid: Arc<KGrid>,
    values: Vec<V>,
}

pub type ScalarProfile = Profile<C64>;
pub type PhotonProfile = Profile<[C64; 2]>;

/// Finite-check for profile value types.
pub trait ProfileValue: Copy + Send + Sync {
    fn is_finite(&self) -> bool;
}

impl ProfileValue for C64 {
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl ProfileValue for [C64; 2] {
    fn is_finite(&self) -> bool {
        self.iter().all(ProfileValue::is_finite)
    }
}

impl ProfileValue for f64 {
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<V: ProfileValue> Profile<V> {
    pub fn from_values(grid: Arc<KGrid>, values: Vec<V>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if !values.iter().all(ProfileValue::is_finite) {
            return Err(Error::NonFinite("profile values"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<KGrid>, f: impl Fn(&Vec3) -> V) -> Result<Self> {
        let values = grid.nodes().iter().map(f).collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn value(&self, i: usize) -> V {
        self.values[i]
    }

    pub fn map<W: ProfileValue>(&self, f: impl Fn(&V) -> W) -> Result<Profile<W>> {
        Profile::from_values(self.grid.clone(), self.values.iter().map(f).collect())
    }
}

impl ScalarProfile {
    pub fn zeros(grid: Arc<KGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn to_doc(&self) -> GridDoc {
        let mut doc = self.grid.to_doc();
        doc.values = Some(self.values.iter().map(|&z| z.into()).collect());
        doc
    }

    pub fn from_doc(doc: &GridDoc) -> Result<Self> {
        let grid = Arc::new(KGrid::from_doc(doc)?);
        let values = doc.values.as_ref().ok_or(Error::LengthMismatch { expected: grid.len(), got: 0 })?;
        Self::from_values(grid, values.iter().map(|&z| z.into()).collect())
    }
}

impl PhotonProfile {
    pub fn to_doc(&self) -> GridDoc {
        let mut doc = self.grid.to_doc();
        doc.values = Some(self.values.iter().map(|v| v[0].into()).collect());
        doc.values_v = Some(self.values.iter().map(|v| v[1].into()).collect());
        doc
    }

    pub fn from_doc(doc: &GridDoc) -> Result<Self> {
        let grid = Arc::new(KGrid::from_doc(doc)?);
        let n = grid.len();
        let h = doc.values.as_ref().ok_or(Error::LengthMismatch { expected: n, got: 0 })?;
        let v = doc.values_v.as_ref().ok_or(Error::LengthMismatch { expected: n, got: 0 })?;
        if h.len() != v.len() {
            return Err(Error::LengthMismatch { expected: h.len(), got: v.len() });
        }
        let values = h.iter().zip(v).map(|(&a, &b)| [a.into(), b.into()]).collect();
        Self::from_values(grid, values)
    }
}

/// Per-node coherent-state construction from a profile value.
pub trait CoherentAmplitude: ProfileValue {
    type State: FockVector;
    fn coherent(&self, cutoff: usize, node: usize) -> Result<Self::State>;
}

impl CoherentAmplitude for C64 {
    type State = FockState1;
    fn coherent(&self, cutoff: usize, node: usize) -> Result<FockState1> {
        fock::coherent_state_1_at(*self, cutoff, Some(node))
    }
}

impl CoherentAmplitude for [C64; 2] {
    type State = FockState2;
    fn coherent(&self, cutoff: usize, node: usize) -> Result<FockState2> {
        fock::coherent_state_2_at(self[0], self[1], cutoff, Some(node))
    }
}

/// A normalized oscillator wave function attached to every grid node.
#[derive(Debug, Clone)]
pub struct StateField<S> {
    grid: Arc<KGrid>,
    states: Vec<S>,
    constants: PhysicalConstants,
}

/// One-mode field (scalar boson).
pub type ScalarField = StateField<FockState1>;
/// Two-mode field (photon, H and V polarization).
pub type EmStateField = StateField<FockState2>;

impl<S: FockVector> StateField<S> {
    pub fn new(grid: Arc<KGrid>, states: Vec<S>, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        if states.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: states.len() });
        }
        if let Some(bad) = states.iter().find(|s| !s.is_normalized()) {
            return Err(Error::NotNormalized(bad.norm()));
        }
        Ok(Self { grid, states, constants })
    }

    /// Field with the same state at every node.
    pub fn uniform(grid: Arc<KGrid>, state: S, constants: PhysicalConstants) -> Result<Self> {
        let states = vec![state; grid.len()];
        Self::new(grid, states, constants)
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &S {
        &self.states[i]
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn with_constants(&self, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        Ok(Self { constants, ..self.clone() })
    }

    /// Per-node `⟨ψ_k|O|ψ_k⟩`, in node order.
    pub fn expectations(&self, op: &OpExpr) -> Result<Vec<C64>> {
        exec::map_slice(&self.states, |_, s| s.expectation(op)).into_iter().collect()
    }

    pub(crate) fn from_parts(grid: Arc<KGrid>, states: Vec<S>, constants: PhysicalConstants) -> Self {
        Self { grid, states, constants }
    }
}

impl ScalarField {
    /// Per-node `⟨â⟩`.
    pub fn annihilation_means(&self) -> Vec<C64> {
        self.expectations(&OpExpr::product(&[LadderOp::A])).expect("single-mode op on single-mode state")
    }

    /// Per-node `⟨â†â⟩` (real part).
    pub fn number_means(&self) -> Vec<f64> {
        self.expectations(&OpExpr::number(fock::Mode::Single))
            .expect("single-mode op on single-mode state")
            .into_iter()
            .map(|z| z.re)
            .collect()
    }
}

impl EmStateField {
    /// Per-node `(⟨â_H⟩, ⟨â_V⟩)`.
    pub fn annihilation_means(&self) -> Vec<[C64; 2]> {
        exec::map_slice(&self.states, |_, s| {
            [
                s.expectation(&OpExpr::product(&[LadderOp::A_H])).expect("two-mode op"),
                s.expectation(&OpExpr::product(&[LadderOp::A_V])).expect("two-mode op"),
            ]
        })
    }

    /// Per-node `⟨â_H†â_H + â_V†â_V⟩`.
    pub fn number_means(&self) -> Vec<f64> {
        self.expectations(&OpExpr::stokes(0)).expect("two-mode op").into_iter().map(|z| z.re).collect()
    }
}

/// Attaches the coherent state of the profile value to every node:
/// `|F(k)⟩` for a scalar profile, `|F_H(k), F_V(k)⟩` for a photon profile.
pub fn coherent_field<V: CoherentAmplitude>(
    profile: &Profile<V>,
    cutoff: usize,
    constants: PhysicalConstants,
) -> Result<StateField<V::State>> {
    constants.validate()?;
    let states: Result<Vec<_>> = exec::map_slice(profile.values(), |i, v| v.coherent(cutoff, i)).into_iter().collect();
    Ok(StateField::from_parts(profile.grid().clone(), states?, constants))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockVector;

    #[test]
    fn normalization_factor_values() {
        let n1 = normalization_factor(&Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert!((n1 - (16.0 * PI.powi(3)).sqrt()).abs() < 1e-12);
        assert!((n1 - 22.2733).abs() < 1e-4);
        let n4 = normalization_factor(&Vec3::new(0.0, 4.0, 0.0)).unwrap();
        assert!((n4 - 2.0 * n1).abs() < 1e-12);
        assert!(matches!(normalization_factor(&Vec3::zeros()), Err(Error::ZeroWaveVector { .. })));
    }

    #[test]
    fn constants_validation() {
        assert!(PhysicalConstants::natural().validate().is_ok());
        assert!(PhysicalConstants::si().validate().is_ok());
        let bad = PhysicalConstants { epsilon0: 0.0, ..PhysicalConstants::natural() };
        assert!(matches!(bad.validate(), Err(Error::NonPositive { name: "epsilon0", .. })));
        let a = PhysicalConstants::si().alpha();
        assert!((1.0 / a - 137.036).abs() < 1e-3);
    }

    #[test]
    fn zero_profile_gives_vacuum_field() {
        let grid = Arc::new(KGrid::spherical(4, 6, 1.0).unwrap());
        let p = ScalarProfile::zeros(grid.clone());
        let f = coherent_field(&p, 8, PhysicalConstants::natural()).unwrap();
        assert!(f.states().iter().all(|s| s.coeff(0) == C64::new(1.0, 0.0)));
    }

    #[test]
    fn coherent_field_means_track_profile() {
        let grid = Arc::new(KGrid::spherical(8, 14, 1.0).unwrap());
        let p = ScalarProfile::from_fn(grid, |k| C64::new(0.8, -0.3) * (-k.norm_squared() / 2.0).exp()).unwrap();
        let f = coherent_field(&p, 16, PhysicalConstants::natural()).unwrap();
        for (a, v) in f.annihilation_means().iter().zip(p.values()) {
            assert!((a - v).norm() <= 1e-8);
        }
    }

    #[test]
    fn photon_profile_with_vacuum_v() {
        let grid = Arc::new(KGrid::spherical(4, 6, 1.0).unwrap());
        let p =
            PhotonProfile::from_fn(grid, |k| [C64::new(k.norm().recip().min(1.0), 0.0), C64::new(0.0, 0.0)]).unwrap();
        let f = coherent_field(&p, 12, PhysicalConstants::natural()).unwrap();
        assert!(f.annihilation_means().iter().all(|m| m[1] == C64::new(0.0, 0.0)));
    }

    #[test]
    fn guard_violation_names_node() {
        let grid = Arc::new(KGrid::explicit(vec![Vec3::x(), Vec3::y()], vec![1.0, 1.0]).unwrap());
        let p = ScalarProfile::from_values(grid, vec![C64::new(0.1, 0.0), C64::new(5.0, 0.0)]).unwrap();
        match coherent_field(&p, 8, PhysicalConstants::natural()) {
            Err(Error::TruncationGuard { node: Some(1), .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn field_rejects_unnormalized() {
        let grid = Arc::new(KGrid::explicit(vec![Vec3::x()], vec![1.0]).unwrap());
        let s = FockState1::from_coeffs(2, vec![C64::new(1.0, 0.0); 3]).unwrap();
        assert!(StateField::new(grid.clone(), vec![s], PhysicalConstants::natural()).is_err());
        let s = FockState1::vacuum(2).unwrap();
        assert!(s.is_normalized());
        assert!(StateField::new(grid, vec![s], PhysicalConstants::natural()).is_ok());
    }

    #[test]
    fn profile_doc_round_trip() {
        let grid = Arc::new(KGrid::box_modes(2.0, 2, [0.5; 3]).unwrap());
        let p = PhotonProfile::from_fn(grid, |k| [C64::new(k.x, k.y), C64::new(k.z, 1.0)]).unwrap();
        let json = serde_json::to_string(&p.to_doc()).unwrap();
        let back = PhotonProfile::from_doc(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
