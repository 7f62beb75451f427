//! Site operator bases and product generators on periodic chains.

mod generators;
mod site;

pub use generators::{
    all_descriptors, build_generator_set, decompose_operator, expand_operator, locality_degrees, materialize,
    minimal_window, spin_half_count, Assignments, Combinations, Convention, GeneratorDescriptor, GeneratorSet,
    LocalOperator, Locality, Manifest, ManifestEntry, Threshold, MAX_DENSE_DIM, MAX_SITES,
};
pub use site::{
    clebsch_gordan, gell_mann_site, single_site_basis, single_site_spin, su3_structure_constants,
    su3_symmetric_constants, Axis, SiteOperatorBasis, Spin,
};
