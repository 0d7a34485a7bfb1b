use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fem::DofMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofConstraint {
    Free,
    /// Homogeneous Dirichlet: displacement held at zero.
    Fixed,
    /// Prescribed complex displacement amplitude.
    Driven(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    fn contains(self, coords: [usize; 3], dims: [usize; 3]) -> bool {
        match self {
            Face::XMin => coords[0] == 0,
            Face::XMax => coords[0] == dims[0] - 1,
            Face::YMin => coords[1] == 0,
            Face::YMax => coords[1] == dims[1] - 1,
            Face::ZMin => coords[2] == 0,
            Face::ZMax => coords[2] == dims[2] - 1,
        }
    }
}

/// Per-dof constraint tags for a displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    tags: Vec<DofConstraint>,
}

impl BoundaryConditions {
    /// All dofs free.
    pub fn free(dof: &DofMap) -> Self {
        Self {
            tags: vec![DofConstraint::Free; dof.n_dofs()],
        }
    }

    pub fn from_tags(tags: Vec<DofConstraint>) -> Self {
        Self { tags }
    }

    pub fn tags(&self) -> &[DofConstraint] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn set(&mut self, dof: usize, tag: DofConstraint) {
        self.tags[dof] = tag;
    }

    /// Fixes all three components on a face.
    pub fn fix_face(&mut self, dof: &DofMap, face: Face) {
        self.tag_face(dof, face, [DofConstraint::Fixed; 3]);
    }

    /// Prescribes the displacement vector on a face.
    pub fn drive_face(&mut self, dof: &DofMap, face: Face, value: [Complex64; 3]) {
        self.tag_face(dof, face, value.map(DofConstraint::Driven));
    }

    fn tag_face(&mut self, dof: &DofMap, face: Face, tags: [DofConstraint; 3]) {
        let dims = dof.node_dims();
        for n in 0..dof.n_nodes() {
            if face.contains(dof.node_coords(n), dims) {
                for (c, t) in tags.iter().enumerate() {
                    self.tags[3 * n + c] = *t;
                }
            }
        }
    }

    /// Bottom face (z = 0) driven with an x-polarized shear amplitude; top,
    /// front (y = 0) and left (x = 0) faces fixed; remaining faces free.
    /// The driven face takes precedence on shared edges.
    pub fn bottom_driven_shear(dof: &DofMap, amplitude: Complex64) -> Self {
        let mut bc = Self::free(dof);
        bc.fix_face(dof, Face::ZMax);
        bc.fix_face(dof, Face::YMin);
        bc.fix_face(dof, Face::XMin);
        bc.drive_face(dof, Face::ZMin, [amplitude, Complex64::default(), Complex64::default()]);
        bc
    }

    /// Bottom face (z = 0) driven with an x-polarized shear amplitude, top
    /// face fixed, and the four lateral faces sliding: `u_y = u_z = 0` with
    /// `u_x` free. The exact solution is a plane shear wave travelling along z.
    /// The bottom face takes precedence over the lateral faces, then the top.
    pub fn bottom_driven_plane_shear(dof: &DofMap, amplitude: Complex64) -> Self {
        let mut bc = Self::free(dof);
        let sliding = [DofConstraint::Free, DofConstraint::Fixed, DofConstraint::Fixed];
        for face in [Face::XMin, Face::XMax, Face::YMin, Face::YMax] {
            bc.tag_face(dof, face, sliding);
        }
        bc.fix_face(dof, Face::ZMax);
        bc.drive_face(dof, Face::ZMin, [amplitude, Complex64::default(), Complex64::default()]);
        bc
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        !matches!(self.tags[dof], DofConstraint::Free)
    }

    /// Prescribed values (zero at free dofs).
    pub fn prescribed(&self) -> Vec<Complex64> {
        self.tags
            .iter()
            .map(|t| match t {
                DofConstraint::Driven(v) => *v,
                _ => Complex64::default(),
            })
            .collect()
    }

    pub fn constrained_mask(&self) -> Vec<bool> {
        (0..self.tags.len()).map(|d| self.is_constrained(d)).collect()
    }

    /// Scales every driven value.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            tags: self
                .tags
                .iter()
                .map(|t| match t {
                    DofConstraint::Driven(v) => DofConstraint::Driven(v * s),
                    other => *other,
                })
                .collect(),
        }
    }

    pub fn validate(&self, dof: &DofMap) -> Result<()> {
        if self.tags.len() != dof.n_dofs() {
            return Err(Error::DimensionMismatch(format!(
                "{} boundary tags for {} dofs",
                self.tags.len(),
                dof.n_dofs()
            )));
        }
        if self.tags.iter().all(|t| matches!(t, DofConstraint::Free)) {
            return Err(Error::Singular("all dofs are free; at least one must be constrained".into()));
        }
        if let Some(d) = self
            .tags
            .iter()
            .position(|t| matches!(t, DofConstraint::Driven(v) if !(v.re.is_finite() && v.im.is_finite())))
        {
            return Err(Error::InvalidArgument(format!("non-finite driven value at dof {d}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VoxelGrid;

    #[test]
    fn bottom_driven_preset() {
        let d = DofMap::new(VoxelGrid::cubic([4, 5, 6], 1e-3).unwrap());
        let a = Complex64::new(5e-5, 0.0);
        let bc = BoundaryConditions::bottom_driven_shear(&d, a);
        bc.validate(&d).unwrap();
        let corner_bottom = d.node(0, 0, 0);
        assert_eq!(bc.tags()[3 * corner_bottom], DofConstraint::Driven(a));
        assert_eq!(bc.tags()[3 * corner_bottom + 1], DofConstraint::Driven(Complex64::default()));
        let top = d.node(2, 2, 5);
        assert_eq!(bc.tags()[3 * top], DofConstraint::Fixed);
        let right = d.node(3, 2, 2);
        assert_eq!(bc.tags()[3 * right], DofConstraint::Free);
        let back = d.node(2, 4, 2);
        assert!(!bc.is_constrained(3 * back + 2));
        let front = d.node(2, 0, 2);
        assert!(bc.is_constrained(3 * front + 2));
        let driven = bc.prescribed().iter().filter(|v| **v == a).count();
        assert_eq!(driven, 4 * 5);
    }

    #[test]
    fn all_free_is_rejected() {
        let d = DofMap::new(VoxelGrid::cubic([3, 3, 3], 1e-3).unwrap());
        assert!(matches!(BoundaryConditions::free(&d).validate(&d), Err(Error::Singular(_))));
        let short = BoundaryConditions::from_tags(vec![DofConstraint::Fixed; 3]);
        assert!(short.validate(&d).is_err());
    }
}
