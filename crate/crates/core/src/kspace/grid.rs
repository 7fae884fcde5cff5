use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::rules::{gauss_legendre, lebedev};
use crate::error::{Error, Result};
use crate::{exec, sum, Vec3};

/// How a grid was constructed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridKind {
    /// Gauss-Legendre radial rule mapped to `(0, ∞)` times a Lebedev rule.
    SphericalProduct { r_nodes: usize, ang_nodes: usize, r_scale: f64 },
    /// Arbitrary nodes and weights.
    ExplicitList,
    /// Plane-wave modes of a periodic box of side `side`:
    /// `k = (2π/side)(m + shift)`, `m_j ∈ {-⌊n/2⌋, …, n-1-⌊n/2⌋}`.
    BoxModes { side: f64, n: usize, shift: [f64; 3] },
}

/// Quadrature rule over wave-vector space: `∫d𝐤 g(𝐤) ≈ Σ w_i g(k_i)`.
///
/// Nodes never sit at the origin and all weights are strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    kind: GridKind,
    nodes: Vec<Vec3>,
    weights: Vec<f64>,
}

impl KGrid {
    /// Product rule with `r = r_scale (1+t)/(1−t)`; weights carry the `r²`
    /// and map Jacobians. Nodes are ordered radius-major.
    pub fn spherical(r_nodes: usize, ang_nodes: usize, r_scale: f64) -> Result<Self> {
        if r_nodes < 2 {
            return Err(Error::InvalidGrid(format!("r_nodes must be >= 2 (got {r_nodes})")));
        }
        if ang_nodes < 6 {
            return Err(Error::InvalidGrid(format!("ang_nodes must be >= 6 (got {ang_nodes})")));
        }
        if !(r_scale > 0.0 && r_scale.is_finite()) {
            return Err(Error::NonPositive { name: "r_scale", value: r_scale });
        }
        let (t, wt) = gauss_legendre(r_nodes);
        let (dirs, wdir) = lebedev(ang_nodes)?;
        let mut nodes = Vec::with_capacity(r_nodes * ang_nodes);
        let mut weights = Vec::with_capacity(r_nodes * ang_nodes);
        for (ti, wti) in t.iter().zip(&wt) {
            let r = r_scale * (1.0 + ti) / (1.0 - ti);
            let dr = 2.0 * r_scale / ((1.0 - ti) * (1.0 - ti));
            let radial = wti * dr * r * r * 4.0 * PI;
            for (d, wd) in dirs.iter().zip(&wdir) {
                nodes.push(d * r);
                weights.push(radial * wd);
            }
        }
        Self::checked(GridKind::SphericalProduct { r_nodes, ang_nodes, r_scale }, nodes, weights)
    }

    pub fn box_modes(side: f64, n: usize, shift: [f64; 3]) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::NonPositive { name: "box side", value: side });
        }
        if n < 1 {
            return Err(Error::InvalidGrid("box must have at least one mode per axis".into()));
        }
        let dk = 2.0 * PI / side;
        let lo = (n / 2) as f64;
        let w = dk * dk * dk;
        let mut nodes = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let m = [i as f64 - lo, j as f64 - lo, l as f64 - lo];
                    nodes.push(Vec3::new(dk * (m[0] + shift[0]), dk * (m[1] + shift[1]), dk * (m[2] + shift[2])));
                }
            }
        }
        let weights = vec![w; nodes.len()];
        Self::checked(GridKind::BoxModes { side, n, shift }, nodes, weights)
    }

    pub fn explicit(nodes: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        Self::checked(GridKind::ExplicitList, nodes, weights)
    }

    /// Explicit grid holding `k, −k` for every given node, in that order.
    pub fn symmetric_pairs(half: &[(Vec3, f64)]) -> Result<Self> {
        let mut nodes = Vec::with_capacity(2 * half.len());
        let mut weights = Vec::with_capacity(2 * half.len());
        for &(k, w) in half {
            nodes.push(k);
            nodes.push(-k);
            weights.push(w);
            weights.push(w);
        }
        Self::explicit(nodes, weights)
    }

    fn checked(kind: GridKind, nodes: Vec<Vec3>, weights: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one node".into()));
        }
        if nodes.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), got: weights.len() });
        }
        for (i, (k, w)) in nodes.iter().zip(&weights).enumerate() {
            if !k.iter().all(|c| c.is_finite()) {
                return Err(Error::NonFinite("grid node"));
            }
            if k.norm() == 0.0 {
                return Err(Error::ZeroWaveVector { node: Some(i) });
            }
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidGrid(format!("weight {i} must be positive and finite (got {w})")));
            }
        }
        Ok(Self { kind, nodes, weights })
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> Vec3 {
        self.nodes[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// `Σ_i w_i g(i, k_i)`, reduced in node order with compensated summation.
    pub fn integrate<F>(&self, g: F) -> C64
    where
        F: Fn(usize, &Vec3) -> C64 + Sync + Send,
    {
        let terms = exec::map_slice(&self.nodes, |i, k| g(i, k) * self.weights[i]);
        sum::sum_c64(terms)
    }

    pub fn integrate_real<F>(&self, g: F) -> f64
    where
        F: Fn(usize, &Vec3) -> f64 + Sync + Send,
    {
        let terms = exec::map_slice(&self.nodes, |i, k| g(i, k) * self.weights[i]);
        sum::sum_f64(terms)
    }

    /// Index of the node within `tol` (absolute, per component) of `k`.
    pub fn find_node(&self, k: &Vec3, tol: f64) -> Option<usize> {
        self.nodes.iter().position(|n| (n - k).amax() <= tol)
    }

    /// For every node the index of the node at `−k`.
    pub fn mirror_partners(&self, tol: f64) -> Result<Vec<usize>> {
        let scale = self.nodes.iter().map(|k| k.amax()).fold(0.0, f64::max).max(1.0);
        let q = |x: f64| (x / (tol.max(f64::EPSILON) * scale * 4.0)).round() as i64;
        let key = |k: &Vec3| (q(k.x), q(k.y), q(k.z));
        let mut index: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
        for (i, k) in self.nodes.iter().enumerate() {
            index.entry(key(k)).or_default().push(i);
        }
        let mut partners = Vec::with_capacity(self.len());
        for (i, k) in self.nodes.iter().enumerate() {
            let target = -k;
            let (a, b, c) = key(&target);
            let mut found = None;
            'search: for da in -1..=1 {
                for db in -1..=1 {
                    for dc in -1..=1 {
                        if let Some(cands) = index.get(&(a + da, b + db, c + dc)) {
                            if let Some(&j) = cands.iter().find(|&&j| (self.nodes[j] - target).amax() <= tol * scale) {
                                found = Some(j);
                                break 'search;
                            }
                        }
                    }
                }
            }
            match found {
                Some(j) if (self.weights[j] - self.weights[i]).abs() <= tol * self.weights[i].max(1.0) => {
                    partners.push(j)
                }
                _ => return Err(Error::AsymmetricGrid { node: i }),
            }
        }
        Ok(partners)
    }

    /// Indices of the nodes on the outermost radial shell.
    pub fn outermost_nodes(&self) -> Vec<usize> {
        let rmax = self.nodes.iter().map(|k| k.norm()).fold(0.0, f64::max);
        (0..self.len()).filter(|&i| self.nodes[i].norm() >= rmax * (1.0 - 1e-12)).collect()
    }

    /// SHA-256 over the node coordinates and weights (little-endian bits).
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for (k, w) in self.nodes.iter().zip(&self.weights) {
            for x in [k.x, k.y, k.z, *w] {
                h.update(x.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same weights, nodes replaced by `map(k)`; the result is an explicit list.
    pub(crate) fn map_nodes(&self, map: impl Fn(&Vec3) -> Vec3, weights: Vec<f64>) -> Result<Self> {
        let nodes = self.nodes.iter().map(map).collect();
        Self::explicit(nodes, weights)
    }

    pub fn to_doc(&self) -> GridDoc {
        let (kind, parameters) = match &self.kind {
            GridKind::SphericalProduct { r_nodes, ang_nodes, r_scale } => (
                "spherical-product",
                GridParameters {
                    r_nodes: Some(*r_nodes),
                    ang_nodes: Some(*ang_nodes),
                    r_scale: Some(*r_scale),
                    ..Default::default()
                },
            ),
            GridKind::ExplicitList => ("explicit-list", GridParameters::default()),
            GridKind::BoxModes { side, n, shift } => (
                "box-modes",
                GridParameters { side: Some(*side), n: Some(*n), shift: Some(*shift), ..Default::default() },
            ),
        };
        GridDoc {
            kind: kind.to_string(),
            parameters,
            nodes: self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(k, &w)| NodeDoc { kx: k.x, ky: k.y, kz: k.z, w })
                .collect(),
            values: None,
            values_v: None,
        }
    }

    /// Rebuilds a grid from its document. Parameterized kinds are rebuilt
    /// from their parameters and must reproduce the stored nodes.
    pub fn from_doc(doc: &GridDoc) -> Result<Self> {
        let nodes: Vec<Vec3> = doc.nodes.iter().map(|n| Vec3::new(n.kx, n.ky, n.kz)).collect();
        let weights: Vec<f64> = doc.nodes.iter().map(|n| n.w).collect();
        let p = &doc.parameters;
        let missing = |what: &str| Error::InvalidGrid(format!("{} grid document lacks `{what}`", doc.kind));
        let grid = match doc.kind.as_str() {
            "explicit-list" => return Self::explicit(nodes, weights),
            "spherical-product" => Self::spherical(
                p.r_nodes.ok_or_else(|| missing("r_nodes"))?,
                p.ang_nodes.ok_or_else(|| missing("ang_nodes"))?,
                p.r_scale.ok_or_else(|| missing("r_scale"))?,
            )?,
            "box-modes" => Self::box_modes(
                p.side.ok_or_else(|| missing("side"))?,
                p.n.ok_or_else(|| missing("n"))?,
                p.shift.ok_or_else(|| missing("shift"))?,
            )?,
            other => return Err(Error::InvalidGrid(format!("unknown grid kind `{other}`"))),
        };
        if !doc.nodes.is_empty() && (grid.nodes != nodes || grid.weights != weights) {
            return Err(Error::InvalidGrid("stored nodes disagree with grid parameters".into()));
        }
        Ok(grid)
    }
}

/// JSON document `{kind, parameters, nodes:[{kx,ky,kz,w}], values:[{re,im}]}`.
///
/// `values` holds a scalar profile or the H component of a photon profile;
/// `values_v` holds the V component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    pub kind: String,
    #[serde(default)]
    pub parameters: GridParameters,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<ComplexDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values_v: Option<Vec<ComplexDoc>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridParameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ang_nodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexDoc {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexDoc> for C64 {
    fn from(z: ComplexDoc) -> Self {
        C64::new(z.re, z.im)
    }
}
