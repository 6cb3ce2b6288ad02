//! Quasi-random sampling and balanced training-set construction.

mod dataset;
mod sobol;
mod training;

pub use dataset::{class_counts, dataset_header, read_dataset, write_dataset, Dataset, DATASET_MAGIC};
pub use sobol::{l2_star_discrepancy, SobolGenerator, MAX_DIMENSION};
pub use training::{generate_training_set, transform_to_cspace, SampleClass, TrainingSet, BUDGET_PER_SAMPLE};
