//! Scalar boson field: classical waves, energies, correlations, covariance.
//!
//! The phase convention is `k_μ x^μ = |k| x⁰ − k·x`, so a plane wave reads
//! `e^{−i k_μ x^μ} = e^{i(k·x − |k| x⁰)}` with `x⁰ = ct`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, FockState1, FockVector, LadderOp};
use crate::kspace::{norm_factor, KGrid, PhysicalConstants, ScalarField, ScalarProfile, StateField};
use crate::polarization::check_rotation;
use crate::{exec, sum, Mat3, Vec3};

/// A point `(x⁰, 𝐱)` of Minkowski space, `x⁰ = ct` in length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub x0: f64,
    pub x: Vec3,
}

impl SpacetimePoint {
    pub fn new(x0: f64, x: Vec3) -> Self {
        Self { x0, x }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { x0: a[0], x: Vec3::new(a[1], a[2], a[3]) }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x0, self.x.x, self.x.y, self.x.z]
    }

    pub fn origin() -> Self {
        Self { x0: 0.0, x: Vec3::zeros() }
    }

    /// Spatial rotation acting on `𝐱`.
    pub fn rotated(&self, r: &Mat3) -> Self {
        Self { x0: self.x0, x: r * self.x }
    }

    pub fn is_finite(&self) -> bool {
        self.x0.is_finite() && self.x.iter().all(|c| c.is_finite())
    }
}

/// `k_μ x^μ = |k| x⁰ − k·x` for the null wave vector `(|k|, k)`.
pub fn phase(k: &Vec3, x: &SpacetimePoint) -> f64 {
    k.norm() * x.x0 - k.dot(&x.x)
}

/// `e^{−i k_μ x^μ}`.
pub fn plane_wave(k: &Vec3, x: &SpacetimePoint) -> C64 {
    C64::from_polar(1.0, -phase(k, x))
}

/// Boost along the third axis with rapidity `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzBoost {
    pub chi: f64,
}

impl LorentzBoost {
    pub fn new(chi: f64) -> Self {
        Self { chi }
    }

    pub fn inverse(&self) -> Self {
        Self { chi: -self.chi }
    }

    /// `Λx`.
    pub fn apply(&self, p: &SpacetimePoint) -> SpacetimePoint {
        let (sh, ch) = (self.chi.sinh(), self.chi.cosh());
        SpacetimePoint { x0: ch * p.x0 + sh * p.x.z, x: Vec3::new(p.x.x, p.x.y, sh * p.x0 + ch * p.x.z) }
    }

    /// Spatial part of `Λ(|k|, k)`: `(k¹, k², k³ cosh χ + |k| sinh χ)`.
    pub fn boost_wave_vector(&self, k: &Vec3) -> Vec3 {
        Vec3::new(k.x, k.y, k.z * self.chi.cosh() + k.norm() * self.chi.sinh())
    }

    /// Jacobian determinant `|∂k/∂k′| = |k|/|k′|` of the wave-vector map.
    pub fn jacobian(&self, k: &Vec3) -> f64 {
        k.norm() / self.boost_wave_vector(k).norm()
    }
}

/// `φ(x) = 2ℜ ∫d𝐤 (l/N(k)) f(k) e^{−ik_μx^μ}`.
pub fn classical_field(profile: &ScalarProfile, x: &SpacetimePoint, constants: &PhysicalConstants) -> f64 {
    let l = constants.l;
    let v = profile.grid().integrate(|i, k| profile.value(i) * plane_wave(k, x) * (l / norm_factor(k)));
    2.0 * v.re
}

/// `E_cl = ħc ∫d𝐤 |k| |f(k)|²`.
pub fn classical_energy(profile: &ScalarProfile, constants: &PhysicalConstants) -> f64 {
    let e = profile.grid().integrate_real(|i, k| k.norm() * profile.value(i).norm_sqr());
    constants.hbar * constants.c * e
}

/// `E = ħc l³ ∫d𝐤 |k| ⟨ψ_k|â†â ψ_k⟩`.
pub fn quantum_energy(field: &ScalarField) -> f64 {
    FieldMeans::new(field).quantum_energy()
}

/// `φ(x) = 2ℜ ∫d𝐤 (l^{5/2}/N(k)) e^{−ik_μx^μ} ⟨ψ_k|â ψ_k⟩`.
pub fn field_expectation(field: &ScalarField, x: &SpacetimePoint) -> f64 {
    FieldMeans::new(field).field_at(x)
}

/// `E − E_cl`, where `E_cl` is the classical energy of the expectation field.
pub fn energy_inequality_gap(field: &ScalarField) -> f64 {
    FieldMeans::new(field).energies().gap
}

/// `G(x, y)`, see [`FieldMeans::two_point`].
pub fn two_point_function(field: &ScalarField, x: &SpacetimePoint, y: &SpacetimePoint) -> C64 {
    FieldMeans::new(field).two_point(x, y)
}

/// Energy density `e(x)`, see [`FieldMeans::energy_density`].
pub fn energy_density(field: &ScalarField, x: &SpacetimePoint) -> f64 {
    FieldMeans::new(field).energy_density(x)
}

/// Quantum and classical energy of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarEnergies {
    #[serde(rename = "E_cl")]
    pub classical: f64,
    #[serde(rename = "E")]
    pub quantum: f64,
    pub gap: f64,
}

/// Per-node moments `⟨â⟩`, `⟨â†â⟩` of a scalar field, computed once and
/// reused for any number of evaluation points.
#[derive(Debug, Clone)]
pub struct FieldMeans {
    grid: Arc<KGrid>,
    constants: PhysicalConstants,
    a: Vec<C64>,
    n: Vec<f64>,
}

impl FieldMeans {
    pub fn new(field: &ScalarField) -> Self {
        Self {
            grid: field.grid().clone(),
            constants: *field.constants(),
            a: field.annihilation_means(),
            n: field.number_means(),
        }
    }

    pub fn annihilation(&self) -> &[C64] {
        &self.a
    }

    pub fn number(&self) -> &[f64] {
        &self.n
    }

    fn amp(&self) -> f64 {
        self.constants.l.powf(2.5)
    }

    pub fn field_at(&self, x: &SpacetimePoint) -> f64 {
        let c = self.amp();
        let v = self.grid.integrate(|i, k| self.a[i] * plane_wave(k, x) * (c / norm_factor(k)));
        2.0 * v.re
    }

    pub fn quantum_energy(&self) -> f64 {
        let pc = &self.constants;
        let e = self.grid.integrate_real(|i, k| k.norm() * self.n[i]);
        pc.hbar * pc.c * pc.l.powi(3) * e
    }

    pub fn energies(&self) -> ScalarEnergies {
        let pc = &self.constants;
        let scale = pc.hbar * pc.c * pc.l.powi(3);
        let quantum = self.quantum_energy();
        let classical = scale * self.grid.integrate_real(|i, k| k.norm() * self.a[i].norm_sqr());
        let gap = scale * self.grid.integrate_real(|i, k| k.norm() * (self.n[i] - self.a[i].norm_sqr()));
        ScalarEnergies { classical, quantum, gap }
    }

    /// Node-pair expectation `⟨ψ_k|â†|ψ_k⟩⟨ψ_k′|â|ψ_k′⟩` for distinct nodes and
    /// `⟨ψ_k|â†â|ψ_k⟩` on the diagonal.
    fn pair(&self, i: usize, j: usize) -> C64 {
        if i == j {
            C64::new(self.n[i], 0.0)
        } else {
            self.a[i].conj() * self.a[j]
        }
    }

    /// `G(x,y) = ∫d𝐤∫d𝐤′ (l^{5/2}/N)(l^{5/2}/N′) ⟨φ̂⁽⁻⁾_k(x) φ̂⁽⁺⁾_k′(y)⟩`.
    pub fn two_point(&self, x: &SpacetimePoint, y: &SpacetimePoint) -> C64 {
        let c = self.amp();
        let g = &self.grid;
        let right: Vec<C64> = g.nodes().iter().map(|k| plane_wave(k, y) * (c / norm_factor(k))).collect();
        let rows = exec::map_indexed(g.len(), |i| {
            let li = plane_wave(&g.node(i), x).conj() * (c * g.weight(i) / norm_factor(&g.node(i)));
            sum::sum_c64((0..g.len()).map(|j| li * right[j] * g.weight(j) * self.pair(i, j)))
        });
        sum::sum_c64(rows)
    }

    /// `e(x) = ħc l³/(2(2π)³) ∫d𝐤∫d𝐤′ (|k||k′| + k·k′)/√(|k||k′|)
    ///          ⟨φ̂⁽⁻⁾_k(x) φ̂⁽⁺⁾_k′(x)⟩`.
    pub fn energy_density(&self, x: &SpacetimePoint) -> f64 {
        let pc = &self.constants;
        let pref = pc.hbar * pc.c * pc.l.powi(3) / (2.0 * (2.0 * PI).powi(3));
        let g = &self.grid;
        let waves: Vec<C64> = g.nodes().iter().map(|k| plane_wave(k, x)).collect();
        let norms: Vec<f64> = g.nodes().iter().map(|k| k.norm()).collect();
        let rows = exec::map_indexed(g.len(), |i| {
            let ki = g.node(i);
            let li = waves[i].conj() * g.weight(i);
            sum::sum_f64((0..g.len()).map(|j| {
                let kj = g.node(j);
                let kernel = (norms[i] * norms[j] + ki.dot(&kj)) / (norms[i] * norms[j]).sqrt();
                (li * waves[j] * self.pair(i, j)).re * kernel * g.weight(j)
            }))
        });
        pref * sum::sum_f64(rows)
    }
}

/// Field operator `φ̂_k(x) = e^{−ik_μx^μ} â + e^{ik_μx^μ} â†` as a matrix.
fn field_operator(k: &Vec3, x: &SpacetimePoint, cutoff: usize) -> Result<DMatrix<C64>> {
    let a = fock::ladder_matrix(LadderOp::A, cutoff, 1)?;
    let ad = fock::ladder_matrix(LadderOp::A_DAG, cutoff, 1)?;
    let e = plane_wave(k, x);
    Ok(a * e + ad * e.conj())
}

/// `⟨probe|[φ̂_k(x), φ̂_k(y)]|probe⟩ + 2i sin(k_μ(x−y)^μ)`.
///
/// The probe must have no amplitude above `cutoff − 2`.
pub fn commutator_check(k: &Vec3, x: &SpacetimePoint, y: &SpacetimePoint, probe: &FockState1) -> Result<C64> {
    let cutoff = probe.cutoff();
    let allowed = cutoff.saturating_sub(2);
    if cutoff < 2 || probe.max_level() > allowed {
        return Err(Error::SupportViolation { level: probe.max_level(), allowed });
    }
    let px = field_operator(k, x, cutoff)?;
    let py = field_operator(k, y, cutoff)?;
    let comm = &px * &py - &py * &px;
    let v = probe.coeffs();
    let expect = v.dotc(&(&comm * v));
    let delta = phase(k, x) - phase(k, y);
    Ok(expect + C64::new(0.0, 2.0 * delta.sin()))
}

/// Field with nodes moved to `Rk` and per-node states kept: `ψ′_{Rk} = ψ_k`.
/// The result lives on an explicit-list grid.
pub fn rotate_field<S: FockVector>(field: &StateField<S>, r: &Mat3) -> Result<StateField<S>> {
    check_rotation(r)?;
    let grid = field.grid().map_nodes(|k| r * k, field.grid().weights().to_vec())?;
    StateField::new(Arc::new(grid), field.states().to_vec(), *field.constants())
}

/// Like [`rotate_field`] but re-tabulated onto the original grid, which must
/// map onto itself under `R` (node positions within `tol`, equal weights).
pub fn rotate_field_onto<S: FockVector>(field: &StateField<S>, r: &Mat3, tol: f64) -> Result<StateField<S>> {
    check_rotation(r)?;
    let grid = field.grid();
    let mut slots: Vec<Option<S>> = vec![None; grid.len()];
    for (i, k) in grid.nodes().iter().enumerate() {
        let j = grid
            .find_node(&(r * k), tol)
            .filter(|&j| (grid.weight(j) - grid.weight(i)).abs() <= tol * grid.weight(i))
            .ok_or(Error::GridNotClosed { node: i })?;
        if slots[j].is_some() {
            return Err(Error::GridNotClosed { node: i });
        }
        slots[j] = Some(field.state(i).clone());
    }
    let states = slots.into_iter().map(|s| s.expect("bijective node map")).collect();
    StateField::new(grid.clone(), states, *field.constants())
}

/// Boosted field: node `k` moves to `k′ = Λk` with the state kept
/// (`ψ′_{k′} = ψ_k`). The weight becomes `w N(k′)/N(k)` so that each node
/// contributes the same `w/N` amplitude to the field, which gives
/// `φ′(x) = φ(Λ⁻¹x)` exactly on the discrete grid.
pub fn boost_field(field: &ScalarField, boost: &LorentzBoost) -> Result<ScalarField> {
    if !boost.chi.is_finite() {
        return Err(Error::NonFinite("rapidity"));
    }
    let g = field.grid();
    let weights = g
        .nodes()
        .iter()
        .zip(g.weights())
        .map(|(k, w)| w * norm_factor(&boost.boost_wave_vector(k)) / norm_factor(k))
        .collect();
    let grid = g.map_nodes(|k| boost.boost_wave_vector(k), weights)?;
    StateField::new(Arc::new(grid), field.states().to_vec(), *field.constants())
}

/// Oscillator coordinate in the quantum dimension,
/// `x⁴ = √2 r l^{−3/2} ℜ f(k) e^{−ik_μx^μ}` with `r = √(ħ/(m c |k|))`.
pub fn quantum_dimension_displacement(
    f_at_k: C64,
    k: &Vec3,
    x: &SpacetimePoint,
    mass: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::NonPositive { name: "mass", value: mass });
    }
    if k.norm() == 0.0 {
        return Err(Error::ZeroWaveVector { node: None });
    }
    let r = (constants.hbar / (mass * constants.c * k.norm())).sqrt();
    Ok(2f64.sqrt() * r * constants.l.powf(-1.5) * (f_at_k * plane_wave(k, x)).re)
}

/// `(∂²/∂(x⁰)² − ∇²) φ` of the classical field by 4th-order central
/// differences with step `h`.
pub fn dalembertian_fd(profile: &ScalarProfile, x: &SpacetimePoint, h: f64, constants: &PhysicalConstants) -> f64 {
    let phi = |p: SpacetimePoint| classical_field(profile, &p, constants);
    let second = |shift: &dyn Fn(f64) -> SpacetimePoint| {
        (-phi(shift(2.0 * h)) + 16.0 * phi(shift(h)) - 30.0 * phi(shift(0.0)) + 16.0 * phi(shift(-h))
            - phi(shift(-2.0 * h)))
            / (12.0 * h * h)
    };
    let mut result = second(&|d| SpacetimePoint::new(x.x0 + d, x.x));
    for axis in 0..3 {
        result -= second(&|d| {
            let mut p = *x;
            p.x[axis] += d;
            p
        });
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state_1, FockState1};
    use crate::kspace::coherent_field;
    use nalgebra::Rotation3;

    fn nat() -> PhysicalConstants {
        PhysicalConstants::natural()
    }

    fn single(k: Vec3, w: f64) -> Arc<KGrid> {
        Arc::new(KGrid::explicit(vec![k], vec![w]).unwrap())
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn classical_field_single_node() {
        let g = single(Vec3::z(), 1.0);
        let p = ScalarProfile::from_values(g.clone(), vec![c(1.0, 0.0)]).unwrap();
        let expect = 2.0 / (16.0 * PI.powi(3)).sqrt();
        let v = classical_field(&p, &SpacetimePoint::origin(), &nat());
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.08980).abs() < 1e-5);
        let v = classical_field(&p, &SpacetimePoint::new(PI, Vec3::zeros()), &nat());
        assert!((v + expect).abs() < 1e-15);
        let z = ScalarProfile::zeros(g);
        assert_eq!(classical_field(&z, &SpacetimePoint::origin(), &nat()), 0.0);
    }

    #[test]
    fn classical_energy_cases() {
        let g = single(Vec3::new(0.0, 2.0, 0.0), 1.0);
        let p = ScalarProfile::from_values(g.clone(), vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(classical_energy(&p, &nat()), 2.0);
        assert_eq!(classical_energy(&ScalarProfile::zeros(g), &nat()), 0.0);

        let g = Arc::new(KGrid::spherical(32, 14, 1.0).unwrap());
        let p = ScalarProfile::from_fn(g, |k| c((-k.norm_squared() / 2.0).exp(), 0.0)).unwrap();
        assert!((classical_energy(&p, &nat()) - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn quantum_energy_cases() {
        let g = single(Vec3::new(3.0, 0.0, 0.0), 1.0);
        let f = ScalarField::uniform(g.clone(), FockState1::number(1, 4).unwrap(), nat()).unwrap();
        assert!((quantum_energy(&f) - 3.0).abs() < 1e-15);
        let f = ScalarField::uniform(g, FockState1::vacuum(4).unwrap(), nat()).unwrap();
        assert_eq!(quantum_energy(&f), 0.0);
    }

    #[test]
    fn coherent_energy_and_field_match_classical() {
        let pc = PhysicalConstants { l: 1.3, hbar: 0.7, c: 2.0, ..nat() };
        let g = Arc::new(KGrid::spherical(12, 14, 1.0).unwrap());
        let big_f =
            ScalarProfile::from_fn(g, |k| c(0.9, 0.2) * (-k.norm_squared() / 2.0).exp() * (1.0 + 0.3 * k.x)).unwrap();
        let f = big_f.map(|z| z * pc.l.powf(1.5)).unwrap();
        let field = coherent_field(&big_f, 16, pc).unwrap();
        let e = quantum_energy(&field);
        let ecl = classical_energy(&f, &pc);
        assert!((e - ecl).abs() <= 1e-8 * ecl);
        for x in [SpacetimePoint::origin(), SpacetimePoint::new(0.4, Vec3::new(0.3, -1.0, 0.2))] {
            let a = field_expectation(&field, &x);
            let b = classical_field(&f, &x, &pc);
            assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
        assert!(energy_inequality_gap(&field).abs() <= 1e-8 * e);
    }

    #[test]
    fn number_state_field_vanishes() {
        let g = Arc::new(KGrid::spherical(4, 6, 1.0).unwrap());
        let f = ScalarField::uniform(g, FockState1::number(1, 4).unwrap(), nat()).unwrap();
        assert_eq!(field_expectation(&f, &SpacetimePoint::new(0.3, Vec3::x())), 0.0);
        let e = FieldMeans::new(&f).energies();
        assert_eq!(e.classical, 0.0);
        assert!((e.gap - e.quantum).abs() < 1e-15);
    }

    #[test]
    fn superposition_half_amplitude() {
        let k = Vec3::new(0.3, -0.4, 1.2);
        let w = 0.7;
        let g = single(k, w);
        let s = FockState1::normalized(3, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let f = ScalarField::uniform(g, s, nat()).unwrap();
        assert!((f.annihilation_means()[0] - c(0.5, 0.0)).norm() < 1e-15);
        let x = SpacetimePoint::new(0.9, Vec3::new(0.1, 0.2, -0.3));
        // 2ℜ(w/N · e · 1/2) = ℜ(e) w/N
        let expect = plane_wave(&k, &x).re * w / norm_factor(&k);
        assert!((field_expectation(&f, &x) - expect).abs() < 1e-15);
    }

    #[test]
    fn two_point_single_node() {
        let k = Vec3::new(0.0, 0.5, 0.5);
        let w = 0.8;
        let pc = PhysicalConstants { l: 1.1, ..nat() };
        let z = c(0.4, 0.3);
        let f = ScalarField::uniform(single(k, w), coherent_state_1(z, 16).unwrap(), pc).unwrap();
        let x = SpacetimePoint::new(0.2, Vec3::new(1.0, 0.0, 0.3));
        let y = SpacetimePoint::new(-0.5, Vec3::new(0.0, 0.4, 0.0));
        let expect = C64::from_polar(1.0, phase(&k, &x) - phase(&k, &y))
            * (pc.l.powi(5) * w * w / norm_factor(&k).powi(2) * z.norm_sqr());
        assert!((two_point_function(&f, &x, &y) - expect).norm() < 1e-12);
    }

    #[test]
    fn two_point_diagonal_real_nonnegative() {
        let g = Arc::new(KGrid::spherical(4, 14, 1.0).unwrap());
        let p = ScalarProfile::from_fn(g.clone(), |k| c(k.x, -k.y) * (-k.norm()).exp()).unwrap();
        let f = coherent_field(&p, 12, nat()).unwrap();
        let x = SpacetimePoint::new(0.3, Vec3::new(0.1, 0.0, -0.2));
        let gxx = two_point_function(&f, &x, &x);
        assert!(gxx.re >= 0.0);
        assert!(gxx.im.abs() < 1e-14 * (1.0 + gxx.re));
        let vac = ScalarField::uniform(g, FockState1::vacuum(3).unwrap(), nat()).unwrap();
        assert_eq!(two_point_function(&vac, &x, &x), c(0.0, 0.0));
        assert_eq!(energy_density(&vac, &x), 0.0);
    }

    #[test]
    fn energy_density_single_node() {
        let k = Vec3::new(1.0, 2.0, -0.5);
        let w = 0.3;
        let pc = PhysicalConstants { hbar: 1.5, l: 0.9, ..nat() };
        let z = c(0.2, -0.6);
        let f = ScalarField::uniform(single(k, w), coherent_state_1(z, 20).unwrap(), pc).unwrap();
        let expect = pc.hbar * pc.c * pc.l.powi(3) / (2.0 * (2.0 * PI).powi(3)) * w * w * 2.0 * k.norm() * z.norm_sqr();
        for x in [SpacetimePoint::origin(), SpacetimePoint::new(3.0, Vec3::new(1.0, 1.0, 1.0))] {
            assert!((energy_density(&f, &x) - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn commutator_examples() {
        let probe = FockState1::vacuum(4).unwrap();
        let x = SpacetimePoint::new(0.7, Vec3::new(0.1, 0.2, 0.3));
        let r = commutator_check(&Vec3::new(1.0, 2.0, 3.0), &x, &x, &probe).unwrap();
        assert!(r.norm() < 1e-15);

        let k = Vec3::z();
        let x = SpacetimePoint::new(PI / 2.0, Vec3::zeros());
        let y = SpacetimePoint::origin();
        let r = commutator_check(&k, &x, &y, &probe).unwrap();
        // raw commutator is −2i, residual 0
        assert!(r.norm() < 1e-14);

        let probe = FockState1::number(2, 8).unwrap();
        let r = commutator_check(&Vec3::new(-0.3, 1.1, 0.4), &x, &SpacetimePoint::new(0.2, Vec3::x()), &probe).unwrap();
        assert!(r.norm() <= 1e-12);

        let bad = FockState1::number(7, 8).unwrap();
        assert!(matches!(commutator_check(&k, &x, &y, &bad), Err(Error::SupportViolation { level: 7, allowed: 6 })));
    }

    #[test]
    fn rotation_relabels_nodes() {
        let f = ScalarField::uniform(single(Vec3::z(), 1.0), FockState1::number(1, 2).unwrap(), nat()).unwrap();
        let r = *Rotation3::from_axis_angle(&Vec3::x_axis(), PI / 2.0).matrix();
        let g = rotate_field(&f, &r).unwrap();
        assert!((g.grid().node(0) - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        assert_eq!(g.state(0), f.state(0));
        let same = rotate_field(&f, &Mat3::identity()).unwrap();
        assert_eq!(same.grid().nodes(), f.grid().nodes());
        assert!(rotate_field(&f, &(Mat3::identity() * 2.0)).is_err());
    }

    #[test]
    fn rotation_onto_closed_grid() {
        let g = Arc::new(KGrid::box_modes(2.0, 2, [0.5; 3]).unwrap());
        let p = ScalarProfile::from_fn(g.clone(), |k| c(0.1 * k.x + 0.2, 0.05 * k.z)).unwrap();
        let f = coherent_field(&p, 10, nat()).unwrap();
        let r = *Rotation3::from_axis_angle(&Vec3::z_axis(), PI / 2.0).matrix();
        let rf = rotate_field_onto(&f, &r, 1e-9).unwrap();
        let x = SpacetimePoint::new(0.3, Vec3::new(0.2, -0.1, 0.5));
        let lhs = field_expectation(&rf, &x);
        let rhs = field_expectation(&f, &x.rotated(&r.transpose()));
        assert!((lhs - rhs).abs() < 1e-12);
        let r = *Rotation3::from_axis_angle(&Vec3::z_axis(), 0.3).matrix();
        assert!(matches!(rotate_field_onto(&f, &r, 1e-9), Err(Error::GridNotClosed { .. })));
    }

    #[test]
    fn boost_example_and_identity() {
        let b = LorentzBoost::new(2f64.ln());
        let k = Vec3::z();
        assert!((b.boost_wave_vector(&k) - Vec3::new(0.0, 0.0, 2.0)).norm() < 1e-15);
        assert!((b.jacobian(&k) - 0.5).abs() < 1e-15);
        let f = ScalarField::uniform(single(k, 1.0), FockState1::number(1, 2).unwrap(), nat()).unwrap();
        let bf = boost_field(&f, &b).unwrap();
        assert!((bf.grid().node(0).z - 2.0).abs() < 1e-15);
        assert!((bf.grid().weight(0) - 2f64.sqrt()).abs() < 1e-15);

        let id = boost_field(&f, &LorentzBoost::new(0.0)).unwrap();
        assert_eq!(id.grid().nodes(), f.grid().nodes());
        assert_eq!(id.grid().weights(), f.grid().weights());
    }

    #[test]
    fn boost_point_inverse() {
        let b = LorentzBoost::new(0.37);
        let p = SpacetimePoint::new(0.4, Vec3::new(1.0, -2.0, 0.6));
        let q = b.inverse().apply(&b.apply(&p));
        assert!((q.x0 - p.x0).abs() < 1e-14 && (q.x - p.x).norm() < 1e-14);
        // phase invariance k·(Λ⁻¹x) = (Λk)·x
        let k = Vec3::new(0.2, 0.5, -1.0);
        let lhs = phase(&k, &b.inverse().apply(&p));
        let rhs = phase(&b.boost_wave_vector(&k), &p);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn quantum_dimension_cases() {
        let k = Vec3::x();
        let o = SpacetimePoint::origin();
        assert_eq!(quantum_dimension_displacement(c(0.0, 0.0), &k, &o, 1.0, &nat()).unwrap(), 0.0);
        let v = quantum_dimension_displacement(c(1.0, 0.0), &k, &o, 1.0, &nat()).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        let quarter = SpacetimePoint::new(PI / 2.0, Vec3::zeros());
        assert!(quantum_dimension_displacement(c(1.0, 0.0), &k, &quarter, 1.0, &nat()).unwrap().abs() < 1e-15);
        assert!(quantum_dimension_displacement(c(1.0, 0.0), &k, &o, 0.0, &nat()).is_err());
        assert!(quantum_dimension_displacement(c(1.0, 0.0), &Vec3::zeros(), &o, 1.0, &nat()).is_err());
    }

    #[test]
    fn wave_equation_residual_small() {
        let g = Arc::new(KGrid::spherical(16, 26, 1.0).unwrap());
        let p = ScalarProfile::from_fn(g, |k| c(1.0, 0.5) * (-k.norm_squared()).exp()).unwrap();
        let x = SpacetimePoint::new(0.3, Vec3::new(0.2, -0.4, 0.1));
        let scale = classical_field(&p, &x, &nat()).abs().max(1e-3);
        let r = dalembertian_fd(&p, &x, 1e-3, &nat());
        assert!(r.abs() <= 1e-4 * scale, "{r} vs {scale}");
    }
}
