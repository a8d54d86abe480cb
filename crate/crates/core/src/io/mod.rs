//! File formats: models, datasets, images, profiles, run summaries and configs.

pub mod config;
pub mod dataset_file;
pub mod image;
pub mod model_file;
pub mod profiles;
pub mod summary;

pub use config::{GeometrySpec, Manifest, PositionSpec, RunConfig};
pub use dataset_file::{dataset_file_name, dataset_path, millihertz, read_dataset, write_dataset, DatasetHeader};
pub use image::{render, write_image, Palette};
pub use model_file::{read_model, write_field, write_model, ModelHeader};
pub use profiles::{extract_profiles, write_profiles, Profile};
pub use summary::{read_summary, write_summary, SummaryRow, SUMMARY_COLUMNS};
