//! Global operator assembly on the structured hexahedral mesh.
//!
//! Nodal operators share one 27-neighbour, 3×3-block sparsity pattern, so
//! stiffness and mass can be combined entrywise without re-sorting.

use num_complex::Complex64;

use super::{DofMap, HexElement, Lattice};
use crate::error::{Error, Result};
use crate::grid::DisplacementField;
use crate::sparse::SparseOperator;

type ElementBlock = [[Complex64; 24]; 24];

fn axis_ranks(c: usize, n: usize) -> (usize, usize) {
    let before = usize::from(c > 0);
    let count = 1 + before + usize::from(c + 1 < n);
    (before, count)
}

/// CSR skeleton for nodal operators plus the per-node neighbour layout.
fn nodal_pattern(dof: &DofMap) -> (Vec<usize>, Vec<usize>) {
    let [nx, ny, nz] = dof.node_dims();
    let n_dofs = dof.n_dofs();
    let mut indptr = Vec::with_capacity(n_dofs + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(n_dofs * 81);
    let mut neigh = Vec::with_capacity(27);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                neigh.clear();
                for kk in k.saturating_sub(1)..=(k + 1).min(nz - 1) {
                    for jj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                        for ii in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                            neigh.push(dof.node(ii, jj, kk));
                        }
                    }
                }
                for _p in 0..3 {
                    for &m in &neigh {
                        indices.extend_from_slice(&[3 * m, 3 * m + 1, 3 * m + 2]);
                    }
                    indptr.push(indices.len());
                }
            }
        }
    }
    (indptr, indices)
}

/// Offset of node `m` (at `n + delta`) inside node `n`'s row of 3×3 blocks.
#[inline]
fn neighbour_slot(dof: &DofMap, n: [usize; 3], delta: [isize; 3]) -> usize {
    let dims = dof.node_dims();
    let (bi, ci) = axis_ranks(n[0], dims[0]);
    let (bj, cj) = axis_ranks(n[1], dims[1]);
    let (bk, _) = axis_ranks(n[2], dims[2]);
    let ri = (bi as isize + delta[0]) as usize;
    let rj = (bj as isize + delta[1]) as usize;
    let rk = (bk as isize + delta[2]) as usize;
    (rk * cj + rj) * ci + ri
}

/// Sums element blocks into the shared nodal pattern, in element order.
fn assemble_blocks(dof: &DofMap, mut element_block: impl FnMut(usize, &mut ElementBlock)) -> SparseOperator {
    let (indptr, indices) = nodal_pattern(dof);
    let mut values = vec![Complex64::default(); indices.len()];
    let mut block = [[Complex64::default(); 24]; 24];
    for e in 0..dof.n_elements() {
        element_block(e, &mut block);
        let [ei, ej, ek] = dof.element_coords(e);
        for a in 0..8 {
            let na = [ei + (a & 1), ej + ((a >> 1) & 1), ek + ((a >> 2) & 1)];
            let node_a = dof.node(na[0], na[1], na[2]);
            for b in 0..8 {
                let delta = [
                    (b & 1) as isize - (a & 1) as isize,
                    ((b >> 1) & 1) as isize - ((a >> 1) & 1) as isize,
                    ((b >> 2) & 1) as isize - ((a >> 2) & 1) as isize,
                ];
                let slot = neighbour_slot(dof, na, delta);
                for p in 0..3 {
                    let base = indptr[3 * node_a + p] + 3 * slot;
                    for q in 0..3 {
                        values[base + q] += block[3 * a + p][3 * b + q];
                    }
                }
            }
        }
    }
    SparseOperator::from_csr(dof.n_dofs(), dof.n_dofs(), indptr, indices, values)
}

/// Stiffness `K_μ(μ)` of `∇·(μ(∇u + ∇uᵀ))` with element-constant `μ`.
pub fn assemble_stiffness(mu: &[Complex64], dof: &DofMap) -> Result<SparseOperator> {
    if mu.len() != dof.n_elements() {
        return Err(Error::DimensionMismatch(format!(
            "{} moduli for {} elements",
            mu.len(),
            dof.n_elements()
        )));
    }
    if let Some((e, v)) = mu.iter().enumerate().find(|(_, v)| !(v.re > 0.0)) {
        return Err(Error::NonPositiveModulus { element: e, value: v.re });
    }
    Ok(stiffness_unchecked(mu, dof))
}

/// Same as [`assemble_stiffness`] without the positivity check; used inside the
/// reconstruction where intermediate moduli may leave the physical range.
pub(crate) fn stiffness_unchecked(mu: &[Complex64], dof: &DofMap) -> SparseOperator {
    let el = HexElement::new(dof.grid().spacing());
    let k1 = el.stiffness();
    assemble_blocks(dof, |e, block| {
        for i in 0..24 {
            for j in 0..24 {
                block[i][j] = mu[e] * k1[i][j];
            }
        }
    })
}

/// Consistent mass matrix `M(ρ)`.
pub fn assemble_mass(rho: f64, dof: &DofMap) -> Result<SparseOperator> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::InvalidArgument(format!("density must be positive, got {rho}")));
    }
    let el = HexElement::new(dof.grid().spacing());
    let m1 = *el.mass();
    Ok(assemble_blocks(dof, |_, block| {
        for row in block.iter_mut() {
            row.fill(Complex64::default());
        }
        for a in 0..8 {
            for b in 0..8 {
                for p in 0..3 {
                    block[3 * a + p][3 * b + p] = Complex64::new(rho * m1[a][b], 0.0);
                }
            }
        }
    }))
}

/// Operator with one column per element whose 24 entries scatter onto that
/// element's displacement dofs.
fn element_column_operator(dof: &DofMap, column: impl Fn(usize) -> [Complex64; 24]) -> SparseOperator {
    let cols: Vec<[Complex64; 24]> = (0..dof.n_elements()).map(column).collect();
    let mut indptr = Vec::with_capacity(dof.n_dofs() + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(dof.n_dofs() * 8);
    let mut values = Vec::with_capacity(dof.n_dofs() * 8);
    for n in 0..dof.n_nodes() {
        let [i, j, k] = dof.node_coords(n);
        let adj = dof.node_elements(n);
        for p in 0..3 {
            for &e in &adj {
                let [ei, ej, ek] = dof.element_coords(e);
                let a = (i - ei) + 2 * (j - ej) + 4 * (k - ek);
                indices.push(e);
                values.push(cols[e][3 * a + p]);
            }
            indptr.push(indices.len());
        }
    }
    SparseOperator::from_csr(dof.n_dofs(), dof.n_elements(), indptr, indices, values)
}

/// Pressure coupling `K_p`: column `e` holds `−∫_e ∇·w` for every test function `w`.
pub fn assemble_pressure_coupling(dof: &DofMap) -> SparseOperator {
    let el = HexElement::new(dof.grid().spacing());
    let div = *el.divergence();
    element_column_operator(dof, |_| div.map(|d| Complex64::new(-d, 0.0)))
}

/// `K_u(u)`, the μ-linearized stiffness: `K_u(u)·μ = K_μ(μ)·u` for element-constant μ.
pub fn inversion_operator(u: &[Complex64], dof: &DofMap) -> Result<SparseOperator> {
    if u.len() != dof.n_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "{} displacement values for {} dofs",
            u.len(),
            dof.n_dofs()
        )));
    }
    let el = HexElement::new(dof.grid().spacing());
    let k1 = el.stiffness();
    Ok(element_column_operator(dof, |e| {
        let nodes = dof.element_nodes(e);
        let mut ue = [Complex64::default(); 24];
        for a in 0..8 {
            for c in 0..3 {
                ue[3 * a + c] = u[3 * nodes[a] + c];
            }
        }
        let mut col = [Complex64::default(); 24];
        for (i, out) in col.iter_mut().enumerate() {
            *out = (0..24).map(|j| ue[j] * k1[i][j]).sum();
        }
        col
    }))
}

/// `(K_u(u), f(u) = ω²·M·u)` for a measured displacement field.
pub fn assemble_inversion_operator(
    u: &DisplacementField,
    density: f64,
    dof: &DofMap,
) -> Result<(SparseOperator, Vec<Complex64>)> {
    if u.grid() != dof.grid() {
        return Err(Error::DimensionMismatch("displacement grid differs from dof map grid".into()));
    }
    let ku = inversion_operator(u.values(), dof)?;
    let mass = assemble_mass(density, dof)?;
    let w2 = u.omega().powi(2);
    let f = mass.mul_vec(u.values()).into_iter().map(|v| v * w2).collect();
    Ok((ku, f))
}

/// Forward differences between face-adjacent cells, divided by the spacing.
/// Rows are ordered x-differences, then y, then z.
pub fn lattice_gradient_operator(lattice: &Lattice) -> SparseOperator {
    let [nx, ny, nz] = lattice.dims;
    let mut triplets = Vec::new();
    let mut row = 0;
    for axis in 0..3 {
        let inv_h = 1.0 / lattice.spacing[axis];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let mut next = [i, j, k];
                    next[axis] += 1;
                    if next[axis] >= lattice.dims[axis] {
                        continue;
                    }
                    triplets.push((row, lattice.index(i, j, k), Complex64::new(-inv_h, 0.0)));
                    triplets.push((row, lattice.index(next[0], next[1], next[2]), Complex64::new(inv_h, 0.0)));
                    row += 1;
                }
            }
        }
    }
    SparseOperator::from_triplets(row, lattice.len(), triplets).expect("indices are in range")
}

/// Kronecker-structured operators for `J` stacked frequencies.
#[derive(Debug, Clone)]
pub struct MultiFrequencyBlocks {
    /// `I_J ⊗ K_μ`
    pub stiffness: SparseOperator,
    /// `I_J ⊗ K_p`
    pub pressure: SparseOperator,
    /// `diag(ω₁², …, ω_J²) ⊗ M`
    pub mass: SparseOperator,
    /// `[K_u(u₁); …; K_u(u_J)]`
    pub inversion: SparseOperator,
    /// `[f(u₁); …; f(u_J)]`
    pub load: Vec<Complex64>,
}

pub fn build_multifrequency_blocks(
    stiffness: &SparseOperator,
    pressure: &SparseOperator,
    mass: &SparseOperator,
    omegas: &[f64],
    inversion: &[SparseOperator],
    loads: &[Vec<Complex64>],
) -> Result<MultiFrequencyBlocks> {
    let j = omegas.len();
    if j == 0 {
        return Err(Error::InvalidArgument("at least one frequency is required".into()));
    }
    if inversion.len() != j || loads.len() != j {
        return Err(Error::DimensionMismatch(format!(
            "{j} frequencies but {} inversion operators and {} loads",
            inversion.len(),
            loads.len()
        )));
    }
    let n = stiffness.rows();
    if stiffness.cols() != n || mass.rows() != n || mass.cols() != n || pressure.rows() != n {
        return Err(Error::DimensionMismatch("nodal operators do not conform".into()));
    }
    for (ku, f) in inversion.iter().zip(loads) {
        if ku.rows() != n || f.len() != n || ku.cols() != inversion[0].cols() {
            return Err(Error::DimensionMismatch("inversion operator or load does not conform".into()));
        }
    }
    let scaled_mass: Vec<SparseOperator> = omegas.iter().map(|w| mass.scaled(Complex64::new(w * w, 0.0))).collect();
    Ok(MultiFrequencyBlocks {
        stiffness: SparseOperator::block_diagonal(&vec![stiffness; j]),
        pressure: SparseOperator::block_diagonal(&vec![pressure; j]),
        mass: SparseOperator::block_diagonal(&scaled_mass.iter().collect::<Vec<_>>()),
        inversion: SparseOperator::vstack(&inversion.iter().collect::<Vec<_>>())?,
        load: loads.concat(),
    })
}
