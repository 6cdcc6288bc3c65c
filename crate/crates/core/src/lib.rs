//! Counting overlapping, nearly round tracks in binarized photomicrographs.
//!
//! The central routine is [`segmentation_wusem`]: watershed segmentation
//! seeded by successively larger disk erosions, whose per-round results are
//! summed and relabelled to split touching tracks. Around it sit the pieces
//! it is built from (ISODATA thresholding, disk erosion, 8-connected
//! labeling, exact distance transform, priority-flood watershed), region
//! measurements, and the evaluation harness used to pick parameters against
//! manual counts.

pub mod error;
pub mod features;
pub mod labeling;
pub mod morphology;
pub mod pipeline;
pub mod raster;
pub mod relief;
pub mod stats;
pub mod synth;
pub mod threshold;
pub mod wusem;

pub use error::{Error, Result};
pub use features::{filter_eccentricity, region_properties, sample_aggregate, RegionFeature, SampleAggregate};
pub use labeling::{label_binary, label_equal_values};
pub use morphology::{clear_rd_border, disk, erode, fill_holes, remove_small, StructuringElement};
pub use pipeline::Pipeline;
pub use raster::{read_gray, write_gray, write_label_csv, BinaryImage, GrayImage, LabelImage, Raster};
pub use relief::{edt, negate, watershed, DistanceMap, Relief};
pub use threshold::{binarize, isodata_threshold, Histogram};
pub use wusem::{classic_watershed_baseline, enumerate_objects, segmentation_wusem, WusemParams, WusemResult};
