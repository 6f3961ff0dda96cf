//! Spatial discretization of the weak form on an interval or a rectangle.
//!
//! The Dirichlet part Γ₀ is `x = 0`; every other boundary point carries the
//! dynamic condition (Γ₁). Γ₀ nodes are eliminated, so all nodal vectors are
//! indexed by free nodes. Mass is lumped everywhere.

use crate::banded::BandedSym;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// `(0, length)` with `nodes` equispaced nodes.
    Interval { length: f64, nodes: usize },
    /// `(0, lx) × (0, ly)` with an `nx × ny` node grid of bilinear elements.
    Rectangle { lx: f64, ly: f64, nx: usize, ny: usize },
}

impl Geometry {
    pub fn dimension(&self) -> usize {
        match self {
            Geometry::Interval { .. } => 1,
            Geometry::Rectangle { .. } => 2,
        }
    }
}

/// Which experiment a model is built for; selects the hypothesis gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Experiment {
    #[default]
    Run,
    Stable,
    Growth,
    Blowup,
}

impl Experiment {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "run" => Some(Self::Run),
            "stable" => Some(Self::Stable),
            "growth" => Some(Self::Growth),
            "blowup" => Some(Self::Blowup),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Run => "run",
            Self::Stable => "stable",
            Self::Growth => "growth",
            Self::Blowup => "blowup",
        }
    }
}

/// Physical parameters of the problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Strong (Kelvin–Voigt) damping coefficient α ≥ 0.
    pub alpha: f64,
    /// Source exponent, `f(u) = |u|^{p-2} u`.
    pub p: f64,
    /// Boundary damping exponent, `h(s) = κ |s|^{m-2} s`.
    pub m: f64,
    /// Boundary damping coefficient κ.
    pub kappa: f64,
    /// Whether the interior source is active.
    pub source: bool,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            p: 4.0,
            m: 3.0,
            kappa: 1.0,
            source: true,
        }
    }
}

impl Params {
    /// Boundary damping law.
    pub fn h(&self, s: f64) -> f64 {
        self.kappa * s.abs().powf(self.m - 2.0) * s
    }

    /// Strong monotonicity constant of `h`: `(h(s) - h(v))(s - v) >= m₀ |s - v|^m`.
    pub fn monotonicity_constant(&self) -> f64 {
        self.kappa * 2f64.powf(2.0 - self.m)
    }

    pub fn source_term(&self, u: f64) -> f64 {
        if self.source {
            u.abs().powf(self.p - 2.0) * u
        } else {
            0.0
        }
    }
}

/// Checks the parameter gates of the requested experiment.
pub fn check_gates(params: &Params, kernel: &KernelSpec, experiment: Experiment) -> Result<()> {
    let Params { alpha, p, m, kappa, .. } = *params;
    for (name, v) in [("alpha", alpha), ("p", p), ("m", m), ("damping_coefficient", kappa)] {
        if !v.is_finite() {
            return Err(Error::Config(format!("{name} must be finite, got {v}")));
        }
    }
    if p <= 2.0 {
        return Err(Error::Config(format!("source exponent requires p > 2: got p = {p}")));
    }
    if m < 2.0 {
        return Err(Error::Config(format!("boundary damping requires m >= 2: got m = {m}")));
    }
    if alpha < 0.0 {
        return Err(Error::Config(format!("strong damping requires alpha >= 0: got alpha = {alpha}")));
    }
    if kappa < 0.0 {
        return Err(Error::Config(format!(
            "damping_coefficient must be >= 0: got {kappa}"
        )));
    }
    let report = kernel.validate();
    if !report.admissible() {
        return Err(Error::Config(format!(
            "inadmissible relaxation kernel (violated: {}; l = {})",
            report.failures().join(", "),
            report.l
        )));
    }
    let l = report.l;
    match experiment {
        Experiment::Run | Experiment::Stable => {}
        Experiment::Growth | Experiment::Blowup => {
            let label = experiment.name();
            if kappa <= 0.0 {
                return Err(Error::Config(format!(
                    "{label} experiment requires a boundary damping with c_m = C_m = kappa > 0: got kappa = {kappa}"
                )));
            }
            if experiment == Experiment::Growth && alpha <= 0.0 {
                return Err(Error::Config(format!(
                    "growth experiment requires strong damping alpha > 0: got alpha = {alpha} (use experiment = blowup)"
                )));
            }
            if experiment == Experiment::Blowup {
                if alpha != 0.0 {
                    return Err(Error::Config(format!(
                        "blowup experiment requires alpha = 0: got alpha = {alpha}"
                    )));
                }
                if m <= 2.0 {
                    return Err(Error::Config(format!(
                        "blowup experiment requires m > 2: got m = {m} (the linear-damping case m = 2 cannot be handled by the blow-up argument)"
                    )));
                }
            }
            let lower = m.max(2.0 / l);
            if p <= lower {
                return Err(Error::Config(format!(
                    "{label} experiment requires max(m, 2/l) < p: got m = {m}, 2/l = {}, p = {p}",
                    2.0 / l
                )));
            }
        }
    }
    Ok(())
}

/// Assembled operators and parameters of the semi-discrete problem.
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    pub geometry: Geometry,
    pub params: Params,
    pub kernel: KernelSpec,
    /// Coordinates of the free nodes (second component is 0 in 1D).
    coords: Vec<[f64; 2]>,
    /// Total node count including Γ₀ nodes.
    total_nodes: usize,
    /// Global index of every free node.
    free_to_global: Vec<usize>,
    stiffness: BandedSym,
    mass_interior: Vec<f64>,
    mass_boundary: Vec<f64>,
    mass: Vec<f64>,
    boundary_nodes: Vec<usize>,
}

impl DiscreteModel {
    pub fn build(
        geometry: Geometry,
        params: Params,
        kernel: KernelSpec,
        experiment: Experiment,
    ) -> Result<Self> {
        check_gates(&params, &kernel, experiment)?;
        match geometry {
            Geometry::Interval { length, nodes } => {
                if nodes < 3 {
                    return Err(Error::Config(format!("need at least 3 mesh nodes, got {nodes}")));
                }
                if !(length > 0.0 && length.is_finite()) {
                    return Err(Error::Config(format!("domain length must be positive, got {length}")));
                }
                Ok(Self::assemble_interval(geometry, params, kernel, length, nodes))
            }
            Geometry::Rectangle { lx, ly, nx, ny } => {
                if nx < 2 || ny < 2 || nx * ny < 3 {
                    return Err(Error::Config(format!(
                        "need at least a 2 x 2 node grid, got {nx} x {ny}"
                    )));
                }
                if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                    return Err(Error::Config(format!(
                        "domain lengths must be positive, got {lx} x {ly}"
                    )));
                }
                Ok(Self::assemble_rectangle(geometry, params, kernel, lx, ly, nx, ny))
            }
        }
    }

    fn assemble_interval(
        geometry: Geometry,
        params: Params,
        kernel: KernelSpec,
        length: f64,
        nodes: usize,
    ) -> Self {
        let h = length / (nodes - 1) as f64;
        let n = nodes - 1;
        let mut stiffness = BandedSym::zeros(n, 1);
        let mut mass_interior = vec![0.0; n];
        // element e joins global nodes e and e+1; free index = global - 1
        for e in 0..nodes - 1 {
            let ends = [e.checked_sub(1), Some(e)];
            let local = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
            for a in 0..2 {
                let Some(ia) = ends[a] else { continue };
                mass_interior[ia] += 0.5 * h;
                for b in 0..=a {
                    let Some(ib) = ends[b] else { continue };
                    stiffness.add(ia, ib, local[a][b]);
                }
            }
        }
        let mut mass_boundary = vec![0.0; n];
        mass_boundary[n - 1] = 1.0;
        let coords = (1..nodes).map(|i| [i as f64 * h, 0.0]).collect();
        Self::finish(
            geometry,
            params,
            kernel,
            coords,
            nodes,
            (1..nodes).collect(),
            stiffness,
            mass_interior,
            mass_boundary,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble_rectangle(
        geometry: Geometry,
        params: Params,
        kernel: KernelSpec,
        lx: f64,
        ly: f64,
        nx: usize,
        ny: usize,
    ) -> Self {
        let hx = lx / (nx - 1) as f64;
        let hy = ly / (ny - 1) as f64;
        let free_id = |i: usize, j: usize| -> Option<usize> {
            (i > 0).then(|| (i - 1) + j * (nx - 1))
        };
        let n = (nx - 1) * ny;
        let mut stiffness = BandedSym::zeros(n, nx);
        let mut mass_interior = vec![0.0; n];
        let mut mass_boundary = vec![0.0; n];

        let rx = hy / (6.0 * hx);
        let ry = hx / (6.0 * hy);
        let kx = [
            [2.0, -2.0, -1.0, 1.0],
            [-2.0, 2.0, 1.0, -1.0],
            [-1.0, 1.0, 2.0, -2.0],
            [1.0, -1.0, -2.0, 2.0],
        ];
        let ky = [
            [2.0, 1.0, -1.0, -2.0],
            [1.0, 2.0, -2.0, -1.0],
            [-1.0, -2.0, 2.0, 1.0],
            [-2.0, -1.0, 1.0, 2.0],
        ];
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let corners = [
                    free_id(i, j),
                    free_id(i + 1, j),
                    free_id(i + 1, j + 1),
                    free_id(i, j + 1),
                ];
                for a in 0..4 {
                    let Some(ia) = corners[a] else { continue };
                    mass_interior[ia] += 0.25 * hx * hy;
                    for b in 0..4 {
                        let Some(ib) = corners[b] else { continue };
                        if ib <= ia {
                            stiffness.add(ia, ib, rx * kx[a][b] + ry * ky[a][b]);
                        }
                    }
                }
            }
        }
        // Γ₁ edges: bottom, top, right. Each segment splits its length between its ends.
        for j in [0, ny - 1] {
            for i in 0..nx - 1 {
                for id in [free_id(i, j), free_id(i + 1, j)].into_iter().flatten() {
                    mass_boundary[id] += 0.5 * hx;
                }
            }
        }
        for j in 0..ny - 1 {
            for id in [free_id(nx - 1, j), free_id(nx - 1, j + 1)].into_iter().flatten() {
                mass_boundary[id] += 0.5 * hy;
            }
        }
        let mut coords = vec![[0.0; 2]; n];
        let mut free_to_global = vec![0; n];
        for j in 0..ny {
            for i in 1..nx {
                let id = free_id(i, j).unwrap();
                coords[id] = [i as f64 * hx, j as f64 * hy];
                free_to_global[id] = i + j * nx;
            }
        }
        Self::finish(
            geometry,
            params,
            kernel,
            coords,
            nx * ny,
            free_to_global,
            stiffness,
            mass_interior,
            mass_boundary,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        geometry: Geometry,
        params: Params,
        kernel: KernelSpec,
        coords: Vec<[f64; 2]>,
        total_nodes: usize,
        free_to_global: Vec<usize>,
        stiffness: BandedSym,
        mass_interior: Vec<f64>,
        mass_boundary: Vec<f64>,
    ) -> Self {
        let mass = mass_interior
            .iter()
            .zip(&mass_boundary)
            .map(|(a, b)| a + b)
            .collect();
        let boundary_nodes = mass_boundary
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect();
        Self {
            geometry,
            params,
            kernel,
            coords,
            total_nodes,
            free_to_global,
            stiffness,
            mass_interior,
            mass_boundary,
            mass,
            boundary_nodes,
        }
    }

    pub fn dimension(&self) -> usize {
        self.geometry.dimension()
    }

    /// Number of free (unknown) nodes.
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn stiffness(&self) -> &BandedSym {
        &self.stiffness
    }

    pub fn mass_interior(&self) -> &[f64] {
        &self.mass_interior
    }

    pub fn mass_boundary(&self) -> &[f64] {
        &self.mass_boundary
    }

    /// `M = M_Ω + M_Γ`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Free-node indices carrying boundary mass (Γ₁).
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    /// `l = 1 - ∫₀^∞ g`.
    pub fn l(&self) -> f64 {
        self.kernel.l()
    }

    /// Nodal interpolant of `f(x, y)` on the free nodes.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&[x, y]| f(x, y)).collect()
    }

    /// Extends a free-node vector to the full mesh with zeros on Γ₀.
    pub fn to_full_mesh(&self, w: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.total_nodes];
        for (value, &g) in w.iter().zip(&self.free_to_global) {
            full[g] = *value;
        }
        full
    }

    pub fn check_shape(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.len() {
            return Err(Error::Domain(format!(
                "nodal vector has {} entries, model has {} free nodes",
                w.len(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn grad_sq(&self, w: &[f64]) -> f64 {
        self.stiffness.quad_form(w)
    }

    pub fn l2_sq(&self, w: &[f64]) -> f64 {
        weighted_power_sum(&self.mass_interior, w, 2.0)
    }

    pub fn boundary_l2_sq(&self, w: &[f64]) -> f64 {
        self.boundary_nodes
            .iter()
            .map(|&i| self.mass_boundary[i] * w[i] * w[i])
            .sum()
    }

    /// `‖w‖_q^q` with lumped interior weights.
    pub fn lq_pow(&self, w: &[f64], q: f64) -> f64 {
        weighted_power_sum(&self.mass_interior, w, q)
    }

    /// `‖w‖_{q,Γ₁}^q` with boundary weights.
    pub fn boundary_lq_pow(&self, w: &[f64], q: f64) -> f64 {
        self.boundary_nodes
            .iter()
            .map(|&i| self.mass_boundary[i] * w[i].abs().powf(q))
            .sum()
    }

    /// `vᵀ M v`: interior plus boundary kinetic weight.
    pub fn mass_sq(&self, w: &[f64]) -> f64 {
        weighted_power_sum(&self.mass, w, 2.0)
    }

    pub fn norms(&self, w: &[f64]) -> Norms {
        let p = self.params.p;
        let m = self.params.m;
        Norms {
            l2: self.l2_sq(w).sqrt(),
            grad: self.grad_sq(w).max(0.0).sqrt(),
            lp: self.lq_pow(w, p).powf(1.0 / p),
            boundary_l2: self.boundary_l2_sq(w).sqrt(),
            boundary_lm: self.boundary_lq_pow(w, m).powf(1.0 / m),
        }
    }
}

fn weighted_power_sum(weights: &[f64], w: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        weights.iter().zip(w).map(|(a, x)| a * x * x).sum()
    } else {
        weights.iter().zip(w).map(|(a, x)| a * x.abs().powf(q)).sum()
    }
}

/// The norms used by every functional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    /// `‖w‖₂`
    pub l2: f64,
    /// `‖∇w‖₂`
    pub grad: f64,
    /// `‖w‖_p`
    pub lp: f64,
    /// `‖w‖_{2,Γ₁}`
    pub boundary_l2: f64,
    /// `‖w‖_{m,Γ₁}`
    pub boundary_lm: f64,
}

/// Model state: nodal displacement and velocity on the free nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }

    /// Boundary velocity `u_t|_{Γ₁}`.
    pub fn boundary_velocity(&self, model: &DiscreteModel) -> Vec<f64> {
        model.boundary_nodes().iter().map(|&i| self.v[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn interval(nodes: usize) -> DiscreteModel {
        DiscreteModel::build(
            Geometry::Interval { length: 1.0, nodes },
            Params::default(),
            KernelSpec::zero(),
            Experiment::Run,
        )
        .unwrap()
    }

    fn rectangle(nx: usize, ny: usize) -> DiscreteModel {
        DiscreteModel::build(
            Geometry::Rectangle { lx: 1.0, ly: 0.5, nx, ny },
            Params::default(),
            KernelSpec::zero(),
            Experiment::Run,
        )
        .unwrap()
    }

    #[test]
    fn three_node_stiffness_row() {
        let model = interval(3);
        let k = model.stiffness();
        // free node 0 is the middle mesh node; its full-mesh row is [-2, 4, -2]
        // with the Dirichlet column eliminated.
        assert_eq!(k.get(0, 0), 4.0);
        assert_eq!(k.get(0, 1), -2.0);
        assert_eq!(-2.0 + k.get(0, 0) + k.get(0, 1), 0.0);
    }

    #[test]
    fn lumped_mass_entries() {
        let model = interval(11);
        let h = 0.1;
        let m = model.mass_interior();
        for &w in &m[..m.len() - 1] {
            assert!((w - h).abs() < 1e-15);
        }
        assert!((m[m.len() - 1] - h / 2.0).abs() < 1e-15);
        let mb = model.mass_boundary();
        assert_eq!(mb[mb.len() - 1], 1.0);
        assert_eq!(mb.iter().filter(|&&w| w != 0.0).count(), 1);
        assert_eq!(model.boundary_nodes(), &[9]);
    }

    #[test]
    fn norms_of_zero_vanish() {
        let model = interval(21);
        let n = model.norms(&vec![0.0; model.len()]);
        assert_eq!(n, Norms { l2: 0.0, grad: 0.0, lp: 0.0, boundary_l2: 0.0, boundary_lm: 0.0 });
    }

    #[test]
    fn linear_field_norms() {
        let model = interval(401);
        let w = model.interpolate(|x, _| x);
        let n = model.norms(&w);
        assert!((n.grad - 1.0).abs() < 1e-12);
        // trapezoid rule on x² has error h²/6
        assert!((n.l2 * n.l2 - 1.0 / 3.0).abs() < 1e-5);
        assert_eq!(n.boundary_l2, 1.0);
    }

    #[test]
    fn interpolation_error_is_second_order() {
        // ∫₀¹ (eˣ - 1)² dx
        let e = std::f64::consts::E;
        let exact = (e * e - 1.0) / 2.0 - 2.0 * (e - 1.0) + 1.0;
        let err = |nodes: usize| {
            let model = interval(nodes);
            let w = model.interpolate(|x, _| x.exp() - 1.0);
            (model.l2_sq(&w) - exact).abs()
        };
        let (e1, e2, e3) = (err(11), err(21), err(41));
        assert!((e1 / e2).log2() > 1.9, "{e1} {e2}");
        assert!((e2 / e3).log2() > 1.9, "{e2} {e3}");
    }

    #[test]
    fn rectangle_operators() {
        let model = rectangle(5, 4);
        assert_eq!(model.len(), 4 * 4);
        let total_mass: f64 = model.mass_interior().iter().sum();
        // Γ₀ column holds half a column of cells' worth of lumped mass
        let hx = 0.25;
        assert!((total_mass - (0.5 - 0.5 * hx * 0.5)).abs() < 1e-12);
        // Γ₁ length: bottom + top + right, minus the two Γ₀ corner halves
        let boundary: f64 = model.mass_boundary().iter().sum();
        assert!((boundary - (1.0 + 1.0 + 0.5 - 2.0 * 0.5 * hx)).abs() < 1e-12);
        // a field depending only on x: ‖∇w‖² = ∫ 1 = area
        let w = model.interpolate(|x, _| x);
        assert!((model.grad_sq(&w) - 0.5).abs() < 1e-12);
        // interior node of the second column: rows of K for x-linear data
        let full = model.to_full_mesh(&w);
        assert_eq!(full.len(), 20);
        assert_eq!(full[0], 0.0);
    }

    #[test]
    fn stiffness_annihilates_constants_in_interior_rows() {
        let model = interval(9);
        let ones = vec![1.0; model.len()];
        let k1 = model.stiffness().apply(&ones);
        // first free row couples to the Dirichlet node, the last is the Neumann end
        for &r in &k1[1..k1.len() - 1] {
            assert!(r.abs() < 1e-12);
        }
        let model = rectangle(6, 5);
        let ones = vec![1.0; model.len()];
        let k1 = model.stiffness().apply(&ones);
        for (i, c) in model.coords().iter().enumerate() {
            if c[0] > 0.25 {
                assert!(k1[i].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gates() {
        let kernel = KernelSpec::new(&[(0.25, 1.0)]).unwrap();
        let mut params = Params { p: 2.0, ..Params::default() };
        assert!(check_gates(&params, &kernel, Experiment::Run).is_err());
        params.p = 4.0;
        params.m = 1.5;
        assert!(check_gates(&params, &kernel, Experiment::Run).is_err());

        params = Params { p: 3.0, m: 4.0, ..Params::default() };
        let err = check_gates(&params, &kernel, Experiment::Growth).unwrap_err().to_string();
        assert!(err.contains("max(m, 2/l) < p"), "{err}");

        params = Params { alpha: 0.0, m: 2.0, ..Params::default() };
        let err = check_gates(&params, &kernel, Experiment::Blowup).unwrap_err().to_string();
        assert!(err.contains("m > 2"), "{err}");

        let bad = KernelSpec::new(&[(2.0, 1.0)]).unwrap();
        assert!(check_gates(&Params::default(), &bad, Experiment::Run).is_err());
        // l = 0.5: 2/l = 4 = p fails the strict inequality
        let half = KernelSpec::new(&[(0.5, 1.0)]).unwrap();
        assert!(check_gates(&Params::default(), &half, Experiment::Growth).is_err());
        assert!(check_gates(&Params::default(), &kernel, Experiment::Growth).is_ok());
    }

    #[test]
    fn too_few_nodes() {
        let r = DiscreteModel::build(
            Geometry::Interval { length: 1.0, nodes: 2 },
            Params::default(),
            KernelSpec::zero(),
            Experiment::Run,
        );
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn monotonicity_constant_of_power_law() {
        let params = Params { m: 3.0, kappa: 2.0, ..Params::default() };
        assert_eq!(params.monotonicity_constant(), 1.0);
        // (h(s) - h(v))(s - v) >= m₀ |s - v|^m on a few samples
        for (s, v) in [(1.0, -1.0), (0.3, 0.1), (-2.0, 5.0)] {
            let lhs = (params.h(s) - params.h(v)) * (s - v);
            assert!(lhs >= params.monotonicity_constant() * (s - v).abs().powf(params.m) - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn forms_are_positive(seed in prop::collection::vec(-1.0f64..1.0, 30)) {
            let model = interval(31);
            let w = &seed[..model.len()];
            prop_assert!(model.grad_sq(w) >= 0.0);
            if w.iter().any(|&x| x != 0.0) {
                prop_assert!(model.mass_sq(w) > 0.0);
                prop_assert!(model.grad_sq(w) > 0.0);
            }
            let model = rectangle(4, 4);
            let w2 = &seed[..model.len()];
            prop_assert!(model.grad_sq(w2) >= -1e-14);
        }
    }
}
