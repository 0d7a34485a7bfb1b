//! Reference matrices of the 8-node trilinear hexahedron on an axis-aligned box.
//!
//! Local node `a = ax + 2·ay + 4·az` sits at corner `(ax·hx, ay·hy, az·hz)`;
//! local dof `3·a + c` is displacement component `c` of that node.

/// Gauss–Legendre points and weights on [-1, 1] for the 2-point rule.
const GAUSS2: [(f64, f64); 2] = [(-0.577_350_269_189_625_8, 1.0), (0.577_350_269_189_625_8, 1.0)];

#[derive(Debug, Clone)]
pub struct HexElement {
    spacing: [f64; 3],
    /// ∫ (δ_pq ∇N_a·∇N_b + ∂_q N_a ∂_p N_b) for unit shear modulus.
    stiffness: [[f64; 24]; 24],
    /// ∫ N_a N_b per displacement component, unit density.
    mass: [[f64; 8]; 8],
    /// ∫ ∂_c N_a, so that `divergence · u_e = ∫_e ∇·u`.
    divergence: [f64; 24],
}

impl HexElement {
    pub fn new(spacing: [f64; 3]) -> Self {
        let mut stiffness = [[0.0; 24]; 24];
        let mut mass = [[0.0; 8]; 8];
        let mut divergence = [0.0; 24];
        let jac = spacing[0] * spacing[1] * spacing[2] / 8.0;
        for &(xi, wx) in &GAUSS2 {
            for &(eta, wy) in &GAUSS2 {
                for &(zeta, wz) in &GAUSS2 {
                    let w = wx * wy * wz * jac;
                    let (n, grad) = shape_functions([xi, eta, zeta], spacing);
                    for a in 0..8 {
                        for b in 0..8 {
                            mass[a][b] += w * n[a] * n[b];
                            let dot = grad[a][0] * grad[b][0] + grad[a][1] * grad[b][1] + grad[a][2] * grad[b][2];
                            for p in 0..3 {
                                for q in 0..3 {
                                    let delta = if p == q { dot } else { 0.0 };
                                    stiffness[3 * a + p][3 * b + q] += w * (delta + grad[a][q] * grad[b][p]);
                                }
                            }
                        }
                        for c in 0..3 {
                            divergence[3 * a + c] += w * grad[a][c];
                        }
                    }
                }
            }
        }
        Self {
            spacing,
            stiffness,
            mass,
            divergence,
        }
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn stiffness(&self) -> &[[f64; 24]; 24] {
        &self.stiffness
    }

    pub fn mass(&self) -> &[[f64; 8]; 8] {
        &self.mass
    }

    pub fn divergence(&self) -> &[f64; 24] {
        &self.divergence
    }
}

/// Shape function values and physical gradients at a reference point.
pub(crate) fn shape_functions(xi: [f64; 3], spacing: [f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let mut n = [0.0; 8];
    let mut grad = [[0.0; 3]; 8];
    for a in 0..8 {
        let s = [
            if a & 1 == 0 { -1.0 } else { 1.0 },
            if a & 2 == 0 { -1.0 } else { 1.0 },
            if a & 4 == 0 { -1.0 } else { 1.0 },
        ];
        let f = [
            0.5 * (1.0 + s[0] * xi[0]),
            0.5 * (1.0 + s[1] * xi[1]),
            0.5 * (1.0 + s[2] * xi[2]),
        ];
        n[a] = f[0] * f[1] * f[2];
        grad[a] = [
            0.5 * s[0] * f[1] * f[2] * 2.0 / spacing[0],
            0.5 * s[1] * f[0] * f[2] * 2.0 / spacing[1],
            0.5 * s[2] * f[0] * f[1] * 2.0 / spacing[2],
        ];
    }
    (n, grad)
}
