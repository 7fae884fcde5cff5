//! Electromagnetic field of a two-mode state field in the temporal gauge.
//!
//! Each node `k` carries a two-mode state whose modes are polarized along
//! `ε^H(k)` and `ε^V(k)`, the first two rows of `Ξ(k)`. With
//! `v(k) = ε^H ⟨â_H⟩ + ε^V ⟨â_V⟩` and `C(k) = λ l^{5/2} w / N(k)`:
//!
//! ```text
//! A(x) = ℜ Σ C v e^{−ik·x}
//! E(x) = ℜ Σ C c i|k| v e^{−ik·x}
//! B(x) = ℜ Σ C i (k × v) e^{−ik·x}
//! ```

use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{FockState2, FockVector};
use crate::kspace::{norm_factor, EmStateField, KGrid, PhysicalConstants, ScalarProfile, StateField};
use crate::polarization::{check_rotation, compensating_rotation, xi_matrix};
use crate::scalar::{plane_wave, SpacetimePoint};
use crate::sum::NeumaierSum;
use crate::{exec, Mat3, Vec3};

type CVec3 = Vector3<C64>;

/// `A`, `E` and `B` at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmClassicalSample {
    #[serde(rename = "A")]
    pub a: Vec3,
    #[serde(rename = "E")]
    pub e: Vec3,
    #[serde(rename = "B")]
    pub b: Vec3,
    pub x: SpacetimePoint,
}

/// Quantum and classical energies of a photon field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmEnergies {
    #[serde(rename = "E_quantum")]
    pub quantum: f64,
    #[serde(rename = "E_classical")]
    pub classical: f64,
    pub gap: f64,
    pub lambda_l_used: f64,
}

/// Per-node polarization frames and mode moments of a photon field.
#[derive(Debug, Clone)]
pub struct EmMeans {
    grid: Arc<KGrid>,
    constants: PhysicalConstants,
    amps: Vec<[C64; 2]>,
    numbers: Vec<f64>,
    v: Vec<CVec3>,
    coef: Vec<f64>,
}

fn real3(s: &[NeumaierSum; 3]) -> Vec3 {
    Vec3::new(s[0].sum(), s[1].sum(), s[2].sum())
}

fn cvec(v: &Vec3) -> CVec3 {
    v.map(|x| C64::new(x, 0.0))
}

impl EmMeans {
    pub fn new(field: &EmStateField) -> Result<Self> {
        let grid = field.grid().clone();
        let pc = *field.constants();
        let amps = field.annihilation_means();
        let numbers = field.number_means();
        let frames = exec::map_indexed(grid.len(), |i| xi_matrix(&grid.node(i)));
        let mut v = Vec::with_capacity(grid.len());
        for (i, f) in frames.into_iter().enumerate() {
            let f = f.map_err(|_| Error::ZeroWaveVector { node: Some(i) })?;
            v.push(cvec(&f.eps_h) * amps[i][0] + cvec(&f.eps_v) * amps[i][1]);
        }
        let amp = pc.lambda * pc.l.powf(2.5);
        let coef = grid.nodes().iter().zip(grid.weights()).map(|(k, w)| amp * w / norm_factor(k)).collect();
        Ok(Self { grid, constants: pc, amps, numbers, v, coef })
    }

    pub fn grid(&self) -> &Arc<KGrid> {
        &self.grid
    }

    pub fn annihilation(&self) -> &[[C64; 2]] {
        &self.amps
    }

    /// Sums `ℜ Σ_i g(i, e^{−ik_i·x})` componentwise in node order.
    fn accumulate(&self, x: &SpacetimePoint, g: impl Fn(usize, &Vec3, C64) -> CVec3) -> Vec3 {
        let mut acc = [NeumaierSum::new(), NeumaierSum::new(), NeumaierSum::new()];
        for (i, k) in self.grid.nodes().iter().enumerate() {
            let t = g(i, k, plane_wave(k, x));
            for (s, z) in acc.iter_mut().zip(t.iter()) {
                s.add(z.re);
            }
        }
        real3(&acc)
    }

    pub fn vector_potential(&self, x: &SpacetimePoint) -> Vec3 {
        self.accumulate(x, |i, _, e| self.v[i] * (e * self.coef[i]))
    }

    /// `E = −c ∂A/∂x⁰`.
    pub fn electric_field(&self, x: &SpacetimePoint) -> Vec3 {
        let c = self.constants.c;
        self.accumulate(x, |i, k, e| self.v[i] * (e * C64::new(0.0, c * k.norm() * self.coef[i])))
    }

    /// `B = ∇ × A`.
    pub fn magnetic_field(&self, x: &SpacetimePoint) -> Vec3 {
        self.accumulate(x, |i, k, e| cvec(k).cross(&self.v[i]) * (e * C64::new(0.0, self.coef[i])))
    }

    pub fn sample(&self, x: &SpacetimePoint) -> EmClassicalSample {
        EmClassicalSample { a: self.vector_potential(x), e: self.electric_field(x), b: self.magnetic_field(x), x: *x }
    }

    /// `∇·E` by fourth-order central differences with step `h`.
    pub fn gauss_divergence(&self, x: &SpacetimePoint, h: f64) -> Result<f64> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::NonPositive { name: "step", value: h });
        }
        let mut div = NeumaierSum::new();
        for axis in 0..3 {
            let at = |d: f64| {
                let mut p = *x;
                p.x[axis] += d;
                self.electric_field(&p)[axis]
            };
            div.add((-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h));
        }
        Ok(div.sum())
    }

    /// `ħc l³ Σ w|k| (⟨n_H⟩ + ⟨n_V⟩)`.
    pub fn quantum_energy(&self) -> f64 {
        let pc = &self.constants;
        pc.hbar * pc.c * pc.l.powi(3) * self.grid.integrate_real(|i, k| k.norm() * self.numbers[i])
    }

    /// `¼ ε₀ λ² c² l² Σ w|k| (|f_H|² + |f_V|²)` with `f = l^{3/2}⟨â⟩`.
    pub fn classical_energy(&self) -> f64 {
        let pc = &self.constants;
        let s = self.grid.integrate_real(|i, k| k.norm() * (self.amps[i][0].norm_sqr() + self.amps[i][1].norm_sqr()));
        0.25 * pc.epsilon0 * (pc.lambda * pc.c).powi(2) * pc.l.powi(5) * s
    }

    pub fn energies(&self) -> EmEnergies {
        let quantum = self.quantum_energy();
        let classical = self.classical_energy();
        EmEnergies {
            quantum,
            classical,
            gap: quantum - classical,
            lambda_l_used: self.constants.lambda * self.constants.l,
        }
    }
}

pub fn vector_potential(field: &EmStateField, x: &SpacetimePoint) -> Result<Vec3> {
    Ok(EmMeans::new(field)?.vector_potential(x))
}

pub fn electric_field(field: &EmStateField, x: &SpacetimePoint) -> Result<Vec3> {
    Ok(EmMeans::new(field)?.electric_field(x))
}

pub fn magnetic_field(field: &EmStateField, x: &SpacetimePoint) -> Result<Vec3> {
    Ok(EmMeans::new(field)?.magnetic_field(x))
}

pub fn gauss_divergence(field: &EmStateField, x: &SpacetimePoint, h: f64) -> Result<f64> {
    EmMeans::new(field)?.gauss_divergence(x, h)
}

pub fn quantum_energy_em(field: &EmStateField) -> f64 {
    let pc = field.constants();
    let n = field.number_means();
    pc.hbar * pc.c * pc.l.powi(3) * field.grid().integrate_real(|i, k| k.norm() * n[i])
}

pub fn classical_energy_em(field: &EmStateField) -> f64 {
    let pc = field.constants();
    let a = field.annihilation_means();
    let s = field.grid().integrate_real(|i, k| k.norm() * (a[i][0].norm_sqr() + a[i][1].norm_sqr()));
    0.25 * pc.epsilon0 * (pc.lambda * pc.c).powi(2) * pc.l.powi(5) * s
}

/// Values of the product `λl`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `4√(ħ/(ε₀c))`.
    pub published: f64,
    /// `4(ħ/q_el)√(πα)` with `α = q_el²/(4πε₀ħc)`.
    pub published_alpha_form: f64,
    /// `2√(ħ/(ε₀c))`, from `¼ε₀λ²c²l² = ħc`.
    pub self_consistent: f64,
    /// Ratio of the two energy functionals solved for `λl` on a reference
    /// coherent mode.
    pub numeric: f64,
    /// `published / self_consistent`.
    pub ratio: f64,
}

pub fn calibrate_lambda_l(constants: &PhysicalConstants) -> Result<Calibration> {
    constants.validate()?;
    let pc = constants;
    let root = (pc.hbar / (pc.epsilon0 * pc.c)).sqrt();
    let published = 4.0 * root;
    let published_alpha_form = 4.0 * pc.hbar / pc.q_el * (std::f64::consts::PI * pc.alpha()).sqrt();
    let self_consistent = 2.0 * root;

    // E_cl scales as (λl)², so one evaluation at λl = 1 fixes the solution
    let k = Vec3::new(0.0, 0.0, 1.0 / pc.l);
    let grid = Arc::new(KGrid::explicit(vec![k], vec![1.0])?);
    let state = crate::fock::coherent_state_2(C64::new(1.0, 0.0), C64::new(0.0, 0.0), 16)?;
    let unit = pc.with_lambda(1.0 / pc.l);
    let field = StateField::new(grid, vec![state], unit)?;
    let numeric = (quantum_energy_em(&field) / classical_energy_em(&field)).sqrt();

    Ok(Calibration { published, published_alpha_form, self_consistent, numeric, ratio: published / self_consistent })
}

/// The two `k′ = −k` cross-term pieces of the spatially integrated energy of
/// a field polarized along `ε^H` with profile `f`, at time `x0`:
///
/// ```text
/// p₁ = Σ w f(k) f(−k) cos(2|k|x⁰)/|k| · |k|² Ξ₁(k)·Ξ₁(−k)
/// p₂ = Σ w f(k) f(−k) cos(2|k|x⁰)/|k| · [k × Ξ₁(k)]·[k × Ξ₁(−k)]
/// ```
///
/// They enter the energy with opposite signs and cancel when equal.
pub fn mirror_cross_terms(profile: &ScalarProfile, x0: f64) -> Result<(f64, f64)> {
    let grid = profile.grid();
    let partners = grid.mirror_partners(1e-9 * max_norm(grid))?;
    let terms = exec::map_indexed(grid.len(), |i| -> Result<(f64, f64)> {
        let k = grid.node(i);
        let j = partners[i];
        let e1 = xi_matrix(&k)?.eps_h;
        let e1m = xi_matrix(&grid.node(j))?.eps_h;
        let kn = k.norm();
        let pre = grid.weight(i) * (profile.value(i) * profile.value(j)).re * (2.0 * kn * x0).cos() / kn;
        Ok((pre * kn * kn * e1.dot(&e1m), pre * k.cross(&e1).dot(&k.cross(&e1m))))
    });
    let (mut p1, mut p2) = (NeumaierSum::new(), NeumaierSum::new());
    for t in terms {
        let (a, b) = t?;
        p1.add(a);
        p2.add(b);
    }
    Ok((p1.sum(), p2.sum()))
}

fn max_norm(grid: &KGrid) -> f64 {
    grid.nodes().iter().map(|k| k.norm()).fold(0.0, f64::max)
}

fn rotated_states(field: &EmStateField, r: &Mat3) -> Result<Vec<FockState2>> {
    let grid = field.grid();
    let cutoff = field.state(0).cutoff();
    exec::map_indexed(grid.len(), |i| {
        let gamma = compensating_rotation(r, &grid.node(i))?.gamma;
        crate::fock::mode_rotation_unitary(gamma, cutoff)?.adjoint().apply(field.state(i))
    })
    .into_iter()
    .collect()
}

/// Rotated photon field: node `k` moves to `Rk` and its state becomes
/// `U(γ)† ψ_k` with `γ` the compensating angle, so that
/// `A′(x) = R A(Rᵀx)`. The result lives on an explicit-list grid.
pub fn rotate_em_field(field: &EmStateField, r: &Mat3) -> Result<EmStateField> {
    check_rotation(r)?;
    let states = rotated_states(field, r)?;
    let grid = field.grid().map_nodes(|k| r * k, field.grid().weights().to_vec())?;
    StateField::new(Arc::new(grid), states, *field.constants())
}

/// Like [`rotate_em_field`] but re-tabulated onto the original grid, which
/// must map onto itself under `R`.
pub fn rotate_em_field_onto(field: &EmStateField, r: &Mat3, tol: f64) -> Result<EmStateField> {
    check_rotation(r)?;
    let grid = field.grid();
    let mut target = vec![usize::MAX; grid.len()];
    for (i, k) in grid.nodes().iter().enumerate() {
        let j = grid
            .find_node(&(r * k), tol)
            .filter(|&j| (grid.weight(j) - grid.weight(i)).abs() <= tol * grid.weight(i))
            .ok_or(Error::GridNotClosed { node: i })?;
        if target.contains(&j) {
            return Err(Error::GridNotClosed { node: i });
        }
        target[i] = j;
    }
    let rotated = rotated_states(field, r)?;
    let mut states = rotated.clone();
    for (i, s) in rotated.into_iter().enumerate() {
        states[target[i]] = s;
    }
    StateField::new(grid.clone(), states, *field.constants())
}
