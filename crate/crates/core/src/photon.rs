//! Stokes parameters and single-photon state fields.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState2, OpExpr};
use crate::kspace::{EmStateField, KGrid, PhysicalConstants, StateField};
use crate::sum::sum_f64;

/// `ρ` at the outermost grid nodes above this triggers a continuum warning.
pub const OUTER_RHO_WARN: f64 = 1e-3;

/// Integrated Stokes parameters `S_i = l³ Σ w ⟨Ŝ_i⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stokes {
    #[serde(rename = "S0")]
    pub s0: f64,
    #[serde(rename = "S1")]
    pub s1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    #[serde(rename = "S3")]
    pub s3: f64,
}

impl Stokes {
    pub fn to_array(&self) -> [f64; 4] {
        [self.s0, self.s1, self.s2, self.s3]
    }
}

/// Per-node `⟨Ŝ₀⟩ … ⟨Ŝ₃⟩`.
pub fn node_stokes(field: &EmStateField) -> Result<Vec<[f64; 4]>> {
    let cols = (0..4).map(|i| field.expectations(&OpExpr::stokes(i))).collect::<Result<Vec<_>>>()?;
    Ok((0..field.len()).map(|n| [cols[0][n].re, cols[1][n].re, cols[2][n].re, cols[3][n].re]).collect())
}

pub fn stokes_expectation(field: &EmStateField) -> Result<Stokes> {
    let per_node = node_stokes(field)?;
    let l3 = field.constants().l.powi(3);
    let grid = field.grid();
    let s = |i: usize| l3 * grid.integrate_real(|n, _| per_node[n][i]);
    Ok(Stokes { s0: s(0), s1: s(1), s2: s(2), s3: s(3) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhotonPolarization {
    LinearH,
    /// `(|1,0⟩ + i|0,1⟩)/√2`
    CircularPlus,
    /// `(|1,0⟩ − i|0,1⟩)/√2`
    CircularMinus,
}

impl PhotonPolarization {
    fn sign(&self) -> Option<f64> {
        match self {
            Self::LinearH => None,
            Self::CircularPlus => Some(1.0),
            Self::CircularMinus => Some(-1.0),
        }
    }
}

/// Per-node superposition `√ρ e^{iφ}|photon⟩ + √(1−ρ)|0,0⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SinglePhotonSpec {
    pub rho: Vec<f64>,
    pub phase: Vec<f64>,
    pub polarization: PhotonPolarization,
}

impl SinglePhotonSpec {
    pub fn new(rho: Vec<f64>, phase: Vec<f64>, polarization: PhotonPolarization) -> Result<Self> {
        let spec = Self { rho, phase, polarization };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero phase everywhere.
    pub fn real(rho: Vec<f64>, polarization: PhotonPolarization) -> Result<Self> {
        let phase = vec![0.0; rho.len()];
        Self::new(rho, phase, polarization)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phase.len() != self.rho.len() {
            return Err(Error::LengthMismatch { expected: self.rho.len(), got: self.phase.len() });
        }
        for (node, &value) in self.rho.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RhoOutOfRange { node, value });
            }
        }
        if self.phase.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("photon phase"));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &KGrid) -> Result<()> {
        self.validate()?;
        if self.rho.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: self.rho.len() });
        }
        Ok(())
    }

    /// Whether `ρ` at the outermost nodes exceeds [`OUTER_RHO_WARN`], so that
    /// the grid truncates a non-negligible part of the photon.
    pub fn outer_rho_exceeds(&self, grid: &KGrid) -> bool {
        grid.outermost_nodes().iter().any(|&i| self.rho.get(i).is_some_and(|&r| r > OUTER_RHO_WARN))
    }
}

pub fn single_photon_field(
    spec: &SinglePhotonSpec,
    grid: Arc<KGrid>,
    cutoff: usize,
    constants: PhysicalConstants,
) -> Result<EmStateField> {
    spec.check_grid(&grid)?;
    if spec.outer_rho_exceeds(&grid) {
        log::warn!("single-photon rho exceeds {OUTER_RHO_WARN} at the outermost grid nodes");
    }
    let one = C64::new(1.0, 0.0);
    let states = spec
        .rho
        .iter()
        .zip(&spec.phase)
        .map(|(&rho, &phi)| {
            let amp = C64::from_polar(rho.sqrt(), phi);
            let vac = (0, 0, one * (1.0 - rho).sqrt());
            let entries = match spec.polarization.sign() {
                None => vec![vac, (1, 0, amp)],
                Some(s) => {
                    let h = amp * std::f64::consts::FRAC_1_SQRT_2;
                    vec![vac, (1, 0, h), (0, 1, h * C64::new(0.0, s))]
                }
            };
            FockState2::from_entries(cutoff, &entries)
        })
        .collect::<Result<Vec<_>>>()?;
    StateField::new(grid, states, constants)
}

/// `ħc l³ Σ w |k| ρ`.
pub fn single_photon_energy(spec: &SinglePhotonSpec, grid: &KGrid, constants: &PhysicalConstants) -> Result<f64> {
    spec.check_grid(grid)?;
    let pc = constants;
    Ok(pc.hbar * pc.c * pc.l.powi(3) * grid.integrate_real(|i, k| k.norm() * spec.rho[i]))
}

/// Spin along the direction of motion, `±l³ Σ w ρ`. For linear polarization
/// the value is 0 and `circular` is false.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonSpin {
    pub value: f64,
    pub circular: bool,
}

pub fn photon_spin(spec: &SinglePhotonSpec, grid: &KGrid, constants: &PhysicalConstants) -> Result<PhotonSpin> {
    spec.check_grid(grid)?;
    Ok(match spec.polarization.sign() {
        None => PhotonSpin { value: 0.0, circular: false },
        Some(s) => {
            let total = sum_f64(grid.weights().iter().zip(&spec.rho).map(|(w, r)| w * r));
            PhotonSpin { value: s * constants.l.powi(3) * total, circular: true }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::{quantum_energy_em, EmMeans};
    use crate::fock::{coherent_state_2, FockVector};
    use crate::kspace::{coherent_field, PhotonProfile};
    use crate::scalar::SpacetimePoint;
    use crate::Vec3;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn one_node(k: Vec3) -> Arc<KGrid> {
        Arc::new(KGrid::explicit(vec![k], vec![1.0]).unwrap())
    }

    #[test]
    fn stokes_examples() {
        let g = one_node(Vec3::z());
        let vac = StateField::uniform(g.clone(), FockState2::vacuum(3).unwrap(), nat()).unwrap();
        assert_eq!(stokes_expectation(&vac).unwrap().to_array(), [0.0; 4]);

        let s = coherent_state_2(C64::new(1.0, 0.0), C64::new(0.0, 1.0), 16).unwrap();
        let f = StateField::uniform(g, s, nat()).unwrap();
        let st = stokes_expectation(&f).unwrap().to_array();
        for (a, b) in st.iter().zip([2.0, 0.0, 2.0, 0.0]) {
            assert!((a - b).abs() < 1e-9, "{st:?}");
        }
    }

    #[test]
    fn coherent_nodes_are_fully_polarized() {
        let g = Arc::new(KGrid::spherical(4, 14, 1.0).unwrap());
        let p = PhotonProfile::from_fn(g, |k| {
            let s = (-k.norm_squared() / 2.0).exp();
            [C64::new(0.3 * k.x, 0.5) * s, C64::new(-0.2, 0.4 * k.y) * s]
        })
        .unwrap();
        let f = coherent_field(&p, 14, nat()).unwrap();
        for [s0, s1, s2, s3] in node_stokes(&f).unwrap() {
            assert!((s0 * s0 - s1 * s1 - s2 * s2 - s3 * s3).abs() <= 1e-12 * (1.0 + s0 * s0));
        }
    }

    #[test]
    fn single_photon_states() {
        let g = one_node(Vec3::new(0.0, 0.0, 2.0));
        let zero = single_photon_field(
            &SinglePhotonSpec::real(vec![0.0], PhotonPolarization::LinearH).unwrap(),
            g.clone(),
            2,
            nat(),
        )
        .unwrap();
        assert_eq!(zero.state(0), &FockState2::vacuum(2).unwrap());

        let full = single_photon_field(
            &SinglePhotonSpec::real(vec![1.0], PhotonPolarization::LinearH).unwrap(),
            g.clone(),
            2,
            nat(),
        )
        .unwrap();
        assert_eq!(full.state(0), &FockState2::number(1, 0, 2).unwrap());
        let a = EmMeans::new(&full).unwrap().vector_potential(&SpacetimePoint::origin());
        assert_eq!(a, Vec3::zeros());

        let half =
            single_photon_field(&SinglePhotonSpec::real(vec![0.5], PhotonPolarization::LinearH).unwrap(), g, 2, nat())
                .unwrap();
        assert!((half.annihilation_means()[0][0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((half.state(0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rho_range_error_names_node() {
        let err = SinglePhotonSpec::real(vec![0.1, 0.2, 0.3, 1.2], PhotonPolarization::LinearH).unwrap_err();
        assert!(err.to_string().starts_with("rho[3] out of [0,1]"), "{err}");
        assert!(SinglePhotonSpec::real(vec![f64::NAN], PhotonPolarization::LinearH).is_err());
    }

    #[test]
    fn energy_and_spin() {
        let g = one_node(Vec3::new(0.0, 2.0, 0.0));
        let spec = SinglePhotonSpec::real(vec![0.5], PhotonPolarization::LinearH).unwrap();
        assert_eq!(single_photon_energy(&spec, &g, &nat()).unwrap(), 1.0);
        assert_eq!(photon_spin(&spec, &g, &nat()).unwrap(), PhotonSpin { value: 0.0, circular: false });

        let plus = SinglePhotonSpec::real(vec![1.0], PhotonPolarization::CircularPlus).unwrap();
        assert_eq!(photon_spin(&plus, &g, &nat()).unwrap().value, 1.0);
        let f = single_photon_field(&plus, g.clone(), 2, nat()).unwrap();
        let st = stokes_expectation(&f).unwrap();
        assert!((st.s2 - 1.0).abs() < 1e-15 && st.s1 == 0.0);
    }

    #[test]
    fn gaussian_photon_two_paths() {
        let g = Arc::new(KGrid::spherical(8, 14, 1.0).unwrap());
        let rho: Vec<f64> = g.nodes().iter().map(|k| 0.9 * (-k.norm_squared()).exp()).collect();
        let pc = PhysicalConstants { l: 1.2, ..nat() };
        for pol in [PhotonPolarization::CircularPlus, PhotonPolarization::CircularMinus] {
            let spec = SinglePhotonSpec::real(rho.clone(), pol).unwrap();
            let f = single_photon_field(&spec, g.clone(), 2, pc).unwrap();
            let st = stokes_expectation(&f).unwrap();
            let spin = photon_spin(&spec, &g, &pc).unwrap().value;
            assert!((st.s2 - spin).abs() <= 1e-10 * spin.abs());
            assert!(node_stokes(&f).unwrap().iter().all(|s| s[1] == 0.0));
            let e = single_photon_energy(&spec, &g, &pc).unwrap();
            assert!((quantum_energy_em(&f) - e).abs() <= 1e-10 * e);
        }
        let lin = SinglePhotonSpec::real(rho, PhotonPolarization::LinearH).unwrap();
        let f = single_photon_field(&lin, g, 2, pc).unwrap();
        assert_eq!(stokes_expectation(&f).unwrap().s2, 0.0);
    }

    #[test]
    fn outer_rho_flag() {
        let g = KGrid::spherical(4, 6, 1.0).unwrap();
        assert!(SinglePhotonSpec::real(vec![0.5; g.len()], PhotonPolarization::LinearH).unwrap().outer_rho_exceeds(&g));
        let rho = g.nodes().iter().map(|k| (-k.norm_squared()).exp()).collect();
        assert!(!SinglePhotonSpec::real(rho, PhotonPolarization::LinearH).unwrap().outer_rho_exceeds(&g));
    }
}
