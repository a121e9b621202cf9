//! Scan patterns, probes, simulated diffraction data and test objects.
//!
//! Measurements cover the whole (padded) frame: each `d_j` is the magnitude
//! of the frame-sized DFT of the exit wave, which is zero outside window `j`.

mod measure;
mod phantom;
mod png;
mod scan;

pub use measure::{crop_measurements, simulate, Crops, MeasurementSet, PoissonNoise};
pub use phantom::{normalize, object_from_images, phantom_image, phantom_object};
pub use png::{load_grayscale_png, load_truth, save_grayscale_png};
pub use scan::{circular_scan, gaussian_probe, grid_scan, identity_probe, Mask, ScanPattern};
