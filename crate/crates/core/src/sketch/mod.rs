//! 3D colored-stroke sketches, the twelve fixed orthographic snapshots of a
//! sketch (optionally drawn over a chair) and the pooled visual descriptor.

mod camera;
mod encode;
mod raster;
mod stroke;

pub use camera::{ViewCamera, AZIMUTH_STEP_DEG, ELEVATION_DEG, VIEW_COUNT, VIEW_HALF_EXTENT};
pub use encode::{
    descriptor, encode_view, pool_views, LabelHistogram, VisualDescriptor, CELL_PIXELS, CELL_SIZE,
    CLASS_COUNT, GRID, VISUAL_DIM,
};
pub use raster::{
    rasterize, rasterize_labels, snapshot_views, LabelImage, Model, Snapshot, LABEL_COUNT,
    MIN_STROKE_RADIUS_PX, SNAPSHOT_SIZE,
};
pub use stroke::{Sketch, Stroke, WORKING_HALF_EXTENT};
