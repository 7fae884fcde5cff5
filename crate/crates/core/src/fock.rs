//! Truncated Fock spaces of one and two harmonic oscillators.
//!
//! Basis vectors are `|0⟩ … |cutoff⟩` for one mode and `|m,n⟩` with
//! `0 <= m, n <= cutoff` for two modes, stored row-major in `(m, n)`, i.e.
//! `index = m * (cutoff + 1) + n`. Ladder operators use the orthonormal
//! convention `â|n⟩ = √n |n−1⟩`, `â†|n⟩ = √(n+1) |n+1⟩`; creation on the top
//! level `|cutoff⟩` drops the component, so `[â, â†] = 1` holds exactly on
//! states supported below the cutoff.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized states satisfy `| ‖ψ‖ − 1 | <= NORM_TOL`.
pub const NORM_TOL: f64 = 1e-12;

/// Largest probability mass of the untruncated coherent state allowed to fall
/// above the cutoff.
pub const COHERENT_TAIL_TOL: f64 = 1e-10;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    H,
    V,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::H => "H",
            Mode::V => "V",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderKind {
    Annihilate,
    Create,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LadderOp {
    pub mode: Mode,
    pub kind: LadderKind,
}

impl LadderOp {
    pub const A: Self = Self::new(Mode::Single, LadderKind::Annihilate);
    pub const A_DAG: Self = Self::new(Mode::Single, LadderKind::Create);
    pub const A_H: Self = Self::new(Mode::H, LadderKind::Annihilate);
    pub const A_H_DAG: Self = Self::new(Mode::H, LadderKind::Create);
    pub const A_V: Self = Self::new(Mode::V, LadderKind::Annihilate);
    pub const A_V_DAG: Self = Self::new(Mode::V, LadderKind::Create);

    pub const fn new(mode: Mode, kind: LadderKind) -> Self {
        Self { mode, kind }
    }

    pub const fn adjoint(self) -> Self {
        let kind = match self.kind {
            LadderKind::Annihilate => LadderKind::Create,
            LadderKind::Create => LadderKind::Annihilate,
        };
        Self { mode: self.mode, kind }
    }
}

/// A finite sum of coefficient × product of ladder operators.
///
/// In a product `[o1, o2, o3]` the rightmost operator acts first, as in the
/// written expression `o1 o2 o3 |ψ⟩`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpExpr {
    terms: Vec<(C64, Vec<LadderOp>)>,
}

impl OpExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn product(ops: &[LadderOp]) -> Self {
        Self { terms: vec![(ONE, ops.to_vec())] }
    }

    pub fn identity() -> Self {
        Self::product(&[])
    }

    pub fn term(mut self, coeff: C64, ops: &[LadderOp]) -> Self {
        self.terms.push((coeff, ops.to_vec()));
        self
    }

    pub fn terms(&self) -> &[(C64, Vec<LadderOp>)] {
        &self.terms
    }

    /// `â†â` for the given mode.
    pub fn number(mode: Mode) -> Self {
        let a = LadderOp::new(mode, LadderKind::Annihilate);
        Self::product(&[a.adjoint(), a])
    }

    /// Commutator `[a, b] = ab − ba`.
    pub fn commutator(a: LadderOp, b: LadderOp) -> Self {
        Self::new().term(ONE, &[a, b]).term(-ONE, &[b, a])
    }

    /// Stokes operator `Ŝ_i`, `i ∈ 0..4`.
    ///
    /// ```text
    /// Ŝ0 = â†_H â_H + â†_V â_V      Ŝ1 = â†_H â_V + â†_V â_H
    /// Ŝ2 = i â†_V â_H − i â†_H â_V  Ŝ3 = â†_H â_H − â†_V â_V
    /// ```
    pub fn stokes(i: usize) -> Self {
        use LadderOp as L;
        match i {
            0 => Self::new().term(ONE, &[L::A_H_DAG, L::A_H]).term(ONE, &[L::A_V_DAG, L::A_V]),
            1 => Self::new().term(ONE, &[L::A_H_DAG, L::A_V]).term(ONE, &[L::A_V_DAG, L::A_H]),
            2 => Self::new().term(I, &[L::A_V_DAG, L::A_H]).term(-I, &[L::A_H_DAG, L::A_V]),
            3 => Self::new().term(ONE, &[L::A_H_DAG, L::A_H]).term(-ONE, &[L::A_V_DAG, L::A_V]),
            _ => panic!("Stokes operator index {i} out of range 0..4"),
        }
    }
}

/// Common behavior of one- and two-mode truncated state vectors.
pub trait FockVector: Sized + Clone + Send + Sync {
    /// Number of oscillator modes (1 or 2).
    const MODES: usize;

    fn cutoff(&self) -> usize;
    fn coeffs(&self) -> &DVector<C64>;
    fn with_coeffs(&self, coeffs: DVector<C64>) -> Self;
    fn apply_ladder(&self, op: LadderOp) -> Result<Self>;

    fn norm(&self) -> f64 {
        self.coeffs().norm()
    }

    fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    fn inner(&self, other: &Self) -> C64 {
        self.coeffs().dotc(other.coeffs())
    }

    /// `⟨ψ|O|ψ⟩`.
    fn expectation(&self, op: &OpExpr) -> Result<C64> {
        let mut total = ZERO;
        for (coeff, ops) in op.terms() {
            let mut v = self.clone();
            for &o in ops.iter().rev() {
                v = v.apply_ladder(o)?;
            }
            total += coeff * self.inner(&v);
        }
        Ok(total)
    }

    /// Largest occupation number of any single mode with nonzero amplitude.
    fn max_level(&self) -> usize;
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 1 {
        Err(Error::InvalidCutoff(cutoff))
    } else {
        Ok(())
    }
}

fn check_finite(coeffs: &DVector<C64>) -> Result<()> {
    if coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("state coefficients"))
    }
}

fn normalize(mut coeffs: DVector<C64>) -> Result<DVector<C64>> {
    let n = coeffs.norm();
    if n == 0.0 || !n.is_finite() {
        return Err(Error::NotNormalized(n));
    }
    coeffs.unscale_mut(n);
    Ok(coeffs)
}

/// State of a single truncated oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState1 {
    cutoff: usize,
    coeffs: DVector<C64>,
}

impl FockState1 {
    /// Takes coefficients as given (no normalization).
    pub fn from_coeffs(cutoff: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_cutoff(cutoff)?;
        if coeffs.len() != cutoff + 1 {
            return Err(Error::LengthMismatch { expected: cutoff + 1, got: coeffs.len() });
        }
        let coeffs = DVector::from_vec(coeffs);
        check_finite(&coeffs)?;
        Ok(Self { cutoff, coeffs })
    }

    /// Scales the coefficients to unit norm.
    pub fn normalized(cutoff: usize, coeffs: Vec<C64>) -> Result<Self> {
        let s = Self::from_coeffs(cutoff, coeffs)?;
        Ok(Self { coeffs: normalize(s.coeffs)?, ..s })
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::number(0, cutoff)
    }

    pub fn number(n: usize, cutoff: usize) -> Result<Self> {
        check_cutoff(cutoff)?;
        if n > cutoff {
            return Err(Error::SupportViolation { level: n, allowed: cutoff });
        }
        let mut coeffs = DVector::from_element(cutoff + 1, ZERO);
        coeffs[n] = ONE;
        Ok(Self { cutoff, coeffs })
    }

    pub fn coeff(&self, n: usize) -> C64 {
        self.coeffs[n]
    }
}

impl FockVector for FockState1 {
    const MODES: usize = 1;

    fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    fn with_coeffs(&self, coeffs: DVector<C64>) -> Self {
        assert_eq!(coeffs.len(), self.coeffs.len());
        Self { cutoff: self.cutoff, coeffs }
    }

    fn apply_ladder(&self, op: LadderOp) -> Result<Self> {
        if op.mode != Mode::Single {
            return Err(Error::ModeMismatch { mode: op.mode.name(), modes: 1 });
        }
        let d = self.cutoff + 1;
        let mut out = DVector::from_element(d, ZERO);
        match op.kind {
            LadderKind::Annihilate => {
                for n in 1..d {
                    out[n - 1] = self.coeffs[n] * (n as f64).sqrt();
                }
            }
            LadderKind::Create => {
                for n in 0..d - 1 {
                    out[n + 1] = self.coeffs[n] * ((n + 1) as f64).sqrt();
                }
            }
        }
        Ok(self.with_coeffs(out))
    }

    fn max_level(&self) -> usize {
        (0..=self.cutoff).rev().find(|&n| self.coeffs[n] != ZERO).unwrap_or(0)
    }
}

/// State of two truncated oscillators (H and V polarization modes).
#[derive(Debug, Clone, PartialEq)]
pub struct FockState2 {
    cutoff: usize,
    coeffs: DVector<C64>,
}

impl FockState2 {
    pub fn index(cutoff: usize, m: usize, n: usize) -> usize {
        m * (cutoff + 1) + n
    }

    pub fn from_coeffs(cutoff: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_cutoff(cutoff)?;
        let d = (cutoff + 1) * (cutoff + 1);
        if coeffs.len() != d {
            return Err(Error::LengthMismatch { expected: d, got: coeffs.len() });
        }
        let coeffs = DVector::from_vec(coeffs);
        check_finite(&coeffs)?;
        Ok(Self { cutoff, coeffs })
    }

    pub fn normalized(cutoff: usize, coeffs: Vec<C64>) -> Result<Self> {
        let s = Self::from_coeffs(cutoff, coeffs)?;
        Ok(Self { coeffs: normalize(s.coeffs)?, ..s })
    }

    /// Builds a state from sparse `(m, n, amplitude)` entries.
    pub fn from_entries(cutoff: usize, entries: &[(usize, usize, C64)]) -> Result<Self> {
        check_cutoff(cutoff)?;
        let d = cutoff + 1;
        let mut coeffs = vec![ZERO; d * d];
        for &(m, n, c) in entries {
            if m > cutoff || n > cutoff {
                return Err(Error::SupportViolation { level: m.max(n), allowed: cutoff });
            }
            coeffs[Self::index(cutoff, m, n)] += c;
        }
        Self::from_coeffs(cutoff, coeffs)
    }

    pub fn vacuum(cutoff: usize) -> Result<Self> {
        Self::number(0, 0, cutoff)
    }

    pub fn number(m: usize, n: usize, cutoff: usize) -> Result<Self> {
        Self::from_entries(cutoff, &[(m, n, ONE)])
    }

    /// Tensor product `|h⟩ ⊗ |v⟩` of two single-mode states.
    pub fn product(h: &FockState1, v: &FockState1) -> Result<Self> {
        if h.cutoff != v.cutoff {
            return Err(Error::LengthMismatch { expected: h.cutoff, got: v.cutoff });
        }
        let d = h.cutoff + 1;
        let mut coeffs = Vec::with_capacity(d * d);
        for m in 0..d {
            for n in 0..d {
                coeffs.push(h.coeffs[m] * v.coeffs[n]);
            }
        }
        Self::from_coeffs(h.cutoff, coeffs)
    }

    pub fn coeff(&self, m: usize, n: usize) -> C64 {
        self.coeffs[Self::index(self.cutoff, m, n)]
    }

    /// Largest total photon number `m + n` with nonzero amplitude.
    pub fn max_total(&self) -> usize {
        let d = self.cutoff + 1;
        let mut best = 0;
        for m in 0..d {
            for n in 0..d {
                if self.coeffs[m * d + n] != ZERO {
                    best = best.max(m + n);
                }
            }
        }
        best
    }
}

impl FockVector for FockState2 {
    const MODES: usize = 2;

    fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    fn with_coeffs(&self, coeffs: DVector<C64>) -> Self {
        assert_eq!(coeffs.len(), self.coeffs.len());
        Self { cutoff: self.cutoff, coeffs }
    }

    fn apply_ladder(&self, op: LadderOp) -> Result<Self> {
        let d = self.cutoff + 1;
        let mut out = DVector::from_element(d * d, ZERO);
        let src = &self.coeffs;
        match (op.mode, op.kind) {
            (Mode::H, LadderKind::Annihilate) => {
                for m in 1..d {
                    let s = (m as f64).sqrt();
                    for n in 0..d {
                        out[(m - 1) * d + n] = src[m * d + n] * s;
                    }
                }
            }
            (Mode::H, LadderKind::Create) => {
                for m in 0..d - 1 {
                    let s = ((m + 1) as f64).sqrt();
                    for n in 0..d {
                        out[(m + 1) * d + n] = src[m * d + n] * s;
                    }
                }
            }
            (Mode::V, LadderKind::Annihilate) => {
                for m in 0..d {
                    for n in 1..d {
                        out[m * d + n - 1] = src[m * d + n] * (n as f64).sqrt();
                    }
                }
            }
            (Mode::V, LadderKind::Create) => {
                for m in 0..d {
                    for n in 0..d - 1 {
                        out[m * d + n + 1] = src[m * d + n] * ((n + 1) as f64).sqrt();
                    }
                }
            }
            (Mode::Single, _) => {
                return Err(Error::ModeMismatch { mode: op.mode.name(), modes: 2 });
            }
        }
        Ok(self.with_coeffs(out))
    }

    fn max_level(&self) -> usize {
        let d = self.cutoff + 1;
        let mut best = 0;
        for m in 0..d {
            for n in 0..d {
                if self.coeffs[m * d + n] != ZERO {
                    best = best.max(m).max(n);
                }
            }
        }
        best
    }
}

/// Probability mass of the Poisson(`mean`) distribution above `cutoff`.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    // log of the first dropped term, mean^(c+1) e^-mean / (c+1)!
    let first = cutoff + 1;
    let mut log_t = -mean + first as f64 * mean.ln();
    for j in 2..=first {
        log_t -= (j as f64).ln();
    }
    let mut t = log_t.exp();
    let mut total = 0.0;
    let mut n = first;
    while t > 0.0 && (t > total * 1e-17 || (n as f64) < mean) {
        total += t;
        n += 1;
        t *= mean / n as f64;
        if n > first + 100_000 {
            break;
        }
    }
    total
}

/// Smallest cutoff accepted for a coherent amplitude with `|z|² = abs2`.
pub fn required_cutoff(abs2: f64) -> usize {
    let mut c = ((4.0 * abs2).ceil() as usize).max(1);
    while poisson_tail(abs2, c) > COHERENT_TAIL_TOL {
        c += 1;
    }
    c
}

/// Truncation-adequacy guard: `|z|² <= cutoff/4` and the dropped Poisson
/// mass is at most [`COHERENT_TAIL_TOL`].
pub fn check_coherent_guard(z: C64, cutoff: usize, node: Option<usize>) -> Result<()> {
    check_cutoff(cutoff)?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("coherent amplitude"));
    }
    let abs2 = z.norm_sqr();
    if abs2 <= cutoff as f64 / 4.0 && poisson_tail(abs2, cutoff) <= COHERENT_TAIL_TOL {
        Ok(())
    } else {
        Err(Error::TruncationGuard { abs2, cutoff, required: required_cutoff(abs2), node })
    }
}

/// Coherent state `|z⟩`: `c_n ∝ zⁿ/√(n!)` for `n <= cutoff`, renormalized.
pub fn coherent_state_1(z: C64, cutoff: usize) -> Result<FockState1> {
    coherent_state_1_at(z, cutoff, None)
}

pub(crate) fn coherent_state_1_at(z: C64, cutoff: usize, node: Option<usize>) -> Result<FockState1> {
    check_coherent_guard(z, cutoff, node)?;
    let mut coeffs = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new((-z.norm_sqr() / 2.0).exp(), 0.0);
    coeffs.push(c);
    for n in 1..=cutoff {
        c = c * z / (n as f64).sqrt();
        coeffs.push(c);
    }
    FockState1::normalized(cutoff, coeffs)
}

/// Product coherent state `|z, w⟩ = |z⟩ ⊗ |w⟩`.
pub fn coherent_state_2(z: C64, w: C64, cutoff: usize) -> Result<FockState2> {
    coherent_state_2_at(z, w, cutoff, None)
}

pub(crate) fn coherent_state_2_at(z: C64, w: C64, cutoff: usize, node: Option<usize>) -> Result<FockState2> {
    let h = coherent_state_1_at(z, cutoff, node)?;
    let v = coherent_state_1_at(w, cutoff, node)?;
    FockState2::product(&h, &v)
}

/// Dense matrix of a ladder operator on the `modes`-mode truncated space.
pub fn ladder_matrix(op: LadderOp, cutoff: usize, modes: usize) -> Result<DMatrix<C64>> {
    check_cutoff(cutoff)?;
    let d = cutoff + 1;
    let single = DMatrix::from_fn(d, d, |r, c| match op.kind {
        LadderKind::Annihilate if c == r + 1 => C64::new((c as f64).sqrt(), 0.0),
        LadderKind::Create if r == c + 1 => C64::new((r as f64).sqrt(), 0.0),
        _ => ZERO,
    });
    let eye = DMatrix::<C64>::identity(d, d);
    match (modes, op.mode) {
        (1, Mode::Single) => Ok(single),
        (2, Mode::H) => Ok(single.kronecker(&eye)),
        (2, Mode::V) => Ok(eye.kronecker(&single)),
        _ => Err(Error::ModeMismatch { mode: op.mode.name(), modes }),
    }
}

/// Dense matrix of an operator expression.
pub fn op_matrix(op: &OpExpr, cutoff: usize, modes: usize) -> Result<DMatrix<C64>> {
    let d = (cutoff + 1).pow(modes as u32);
    let mut total = DMatrix::from_element(d, d, ZERO);
    for (coeff, ops) in op.terms() {
        let mut prod = DMatrix::<C64>::identity(d, d);
        for &o in ops {
            prod *= ladder_matrix(o, cutoff, modes)?;
        }
        total += prod * *coeff;
    }
    Ok(total)
}

/// Rotation of the polarization mode pair by angle `gamma` (radians):
/// `b̂_H = cos γ â_H − sin γ â_V`, `b̂_V = sin γ â_H + cos γ â_V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRotation {
    pub gamma: f64,
}

impl ModeRotation {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    /// Coefficients of `(b̂_H, b̂_V)` in terms of `(â_H, â_V)`.
    pub fn mode_map(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.gamma.sin_cos();
        [[c, -s], [s, c]]
    }

    /// Applies the mode map to a pair of amplitudes.
    pub fn map_amplitudes(&self, h: C64, v: C64) -> (C64, C64) {
        let [[a, b], [c, d]] = self.mode_map();
        (h * a + v * b, h * c + v * d)
    }

    pub fn unitary(&self, cutoff: usize) -> Result<ModeUnitary> {
        mode_rotation_unitary(self.gamma, cutoff)
    }
}

/// Unitary on the two-mode space implementing a [`ModeRotation`]:
/// `U â_H U† = b̂_H` and `U â_V U† = b̂_V` on states below the cutoff.
#[derive(Debug, Clone)]
pub struct ModeUnitary {
    pub gamma: f64,
    pub cutoff: usize,
    pub matrix: DMatrix<C64>,
}

impl ModeUnitary {
    pub fn apply(&self, state: &FockState2) -> Result<FockState2> {
        if state.cutoff() != self.cutoff {
            return Err(Error::LengthMismatch { expected: self.cutoff, got: state.cutoff() });
        }
        Ok(state.with_coeffs(&self.matrix * state.coeffs()))
    }

    pub fn adjoint(&self) -> Self {
        Self { gamma: -self.gamma, cutoff: self.cutoff, matrix: self.matrix.adjoint() }
    }
}

/// Generator `â_H†â_V − â_V†â_H` of the mode rotations.
pub fn mode_rotation_generator(cutoff: usize) -> Result<DMatrix<C64>> {
    if cutoff == 0 {
        return Err(Error::InvalidCutoff(cutoff));
    }
    let d = (cutoff + 1) * (cutoff + 1);
    let mut g = DMatrix::<C64>::zeros(d, d);
    for m in 0..=cutoff {
        for n in 0..=cutoff {
            let col = FockState2::index(cutoff, m, n);
            if m < cutoff && n > 0 {
                g[(FockState2::index(cutoff, m + 1, n - 1), col)] += ((m + 1) as f64 * n as f64).sqrt();
            }
            if m > 0 && n < cutoff {
                g[(FockState2::index(cutoff, m - 1, n + 1), col)] -= (m as f64 * (n + 1) as f64).sqrt();
            }
        }
    }
    Ok(g)
}

/// `exp(γ (â_H†â_V − â_V†â_H))` on the `(cutoff+1)²`-dimensional space.
///
/// The generator conserves `m + n`, so the exponential is taken block by
/// block over total photon number.
pub fn mode_rotation_unitary(gamma: f64, cutoff: usize) -> Result<ModeUnitary> {
    if !gamma.is_finite() {
        return Err(Error::NonFinite("mode rotation angle"));
    }
    let g = mode_rotation_generator(cutoff)?;
    let d = g.nrows();
    let mut u = DMatrix::<C64>::zeros(d, d);
    for total in 0..=2 * cutoff {
        let idx: Vec<usize> = (total.saturating_sub(cutoff)..=total.min(cutoff))
            .map(|m| FockState2::index(cutoff, m, total - m))
            .collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| g[(idx[r], idx[c])] * gamma);
        let e = expm(&block);
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                u[(ir, ic)] = e[(r, c)];
            }
        }
    }
    Ok(ModeUnitary { gamma, cutoff, matrix: u })
}

/// Largest entry modulus, `‖A‖_max`.
pub fn max_abs(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    assert!(a.is_square(), "expm requires a square matrix");
    let n = a.nrows();
    let norm = one_norm(a);
    // scale so that ‖A/2^s‖₁ <= 1/4; 20 Taylor terms then reach 1e-30
    let s = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = a * C64::new(0.5f64.powi(s), 0.0);
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if one_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// JSON form of a state: explicit cutoff plus `(m, n, re, im)` records in
/// basis order. Single-mode states use `n = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecords {
    pub modes: u8,
    pub cutoff: usize,
    pub records: Vec<(usize, usize, f64, f64)>,
}

impl From<&FockState1> for StateRecords {
    fn from(s: &FockState1) -> Self {
        let records = s.coeffs.iter().enumerate().map(|(m, c)| (m, 0, c.re, c.im)).collect();
        Self { modes: 1, cutoff: s.cutoff, records }
    }
}

impl From<&FockState2> for StateRecords {
    fn from(s: &FockState2) -> Self {
        let d = s.cutoff + 1;
        let records = s.coeffs.iter().enumerate().map(|(i, c)| (i / d, i % d, c.re, c.im)).collect();
        Self { modes: 2, cutoff: s.cutoff, records }
    }
}

impl TryFrom<&StateRecords> for FockState1 {
    type Error = Error;

    fn try_from(r: &StateRecords) -> Result<Self> {
        if r.modes != 1 {
            return Err(Error::ModeMismatch { mode: "single", modes: r.modes as usize });
        }
        check_cutoff(r.cutoff)?;
        let mut coeffs = vec![ZERO; r.cutoff + 1];
        for &(m, n, re, im) in &r.records {
            if n != 0 || m > r.cutoff {
                return Err(Error::SupportViolation { level: m.max(n), allowed: r.cutoff });
            }
            coeffs[m] = C64::new(re, im);
        }
        FockState1::from_coeffs(r.cutoff, coeffs)
    }
}

impl TryFrom<&StateRecords> for FockState2 {
    type Error = Error;

    fn try_from(r: &StateRecords) -> Result<Self> {
        if r.modes != 2 {
            return Err(Error::ModeMismatch { mode: "H", modes: r.modes as usize });
        }
        let entries: Vec<_> = r.records.iter().map(|&(m, n, re, im)| (m, n, C64::new(re, im))).collect();
        FockState2::from_entries(r.cutoff, &entries)
    }
}
