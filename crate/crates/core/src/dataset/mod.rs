//! Sample generation, the binary array format and manifest, and image
//! quality metrics.

pub mod format;
pub mod manifest;
pub mod metrics;
pub mod sample;
pub mod store;

pub use format::{read_array, write_array, Array, ArrayData, DType, FORMAT_VERSION};
pub use manifest::{Manifest, ManifestEntry, MANIFEST_NAME};
pub use metrics::{downsample, mean_report, metrics, psnr, rmse, ssim, MetricsReport};
pub use sample::{
    make_sample, measured_dtn, reconstruct_sequence, PipelineConfig, Sample, SampleMeta,
    DEFAULT_PAIRING, DEFAULT_RADII, DEFAULT_WIDTH,
};
pub use store::{
    dtn_from_array, dtn_to_array, generate_dataset, image_to_array, images_from_array, quantized,
    read_dataset, sample_file_name, sample_from_array, sample_to_array, split_counts,
    write_dataset, DatasetReader, DatasetSpec, IMAGE_HALF_WIDTH,
};
