//! The hyperbolic Penrose tiling of the upper half-plane, its decorated
//! patches, and the affine maps acting on it.

mod affine;
mod agreement;
mod occurrence;
mod patch;
mod suspension;
mod svg;
mod tile;

pub use affine::{AffineMap, Point};
pub use agreement::{agreement_radius, AgreementRadius, AnchoredTiling, Decoration};
pub use occurrence::{
    enumerate_occurrences, reconcile_tile_counts, Occurrence, OccurrenceClass, OccurrenceTable, OCCURRENCE_LIMIT,
};
pub use patch::{slab_partition, PartitionReport, Patch, ShapeModel, TILE_LIST_LIMIT};
pub use suspension::{suspension_project, suspension_project_float, SuspensionPoint};
pub use svg::{geodesic_polyline, parse_path_points, render_svg, write_svg, RenderOptions, RENDER_TILE_LIMIT};
pub use tile::{prototile, tile_containing_point, tile_region, TileAddress};
