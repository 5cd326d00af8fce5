// Every example's main runs to completion.

#[path = "../examples/batch_segmentation.rs"]
mod batch_segmentation;
#[path = "../examples/query_shape_relevance.rs"]
mod query_shape_relevance;
#[path = "../examples/streaming_synopsis.rs"]
mod streaming_synopsis;
#[path = "../examples/checkpoint_restore.rs"]
mod checkpoint_restore;
#[path = "../examples/reconstruction_kinds.rs"]
mod reconstruction_kinds;
#[path = "../examples/labeled_evaluation.rs"]
mod labeled_evaluation;
#[path = "../examples/sin_cubed_benchmark.rs"]
mod sin_cubed_benchmark;

#[test]
fn batch_segmentation_runs() {
    batch_segmentation::main().unwrap();
}

#[test]
fn query_shape_relevance_runs() {
    query_shape_relevance::main().unwrap();
}

#[test]
fn streaming_synopsis_runs() {
    streaming_synopsis::main().unwrap();
}

#[test]
fn checkpoint_restore_runs() {
    checkpoint_restore::main().unwrap();
}

#[test]
fn reconstruction_kinds_runs() {
    reconstruction_kinds::main().unwrap();
}

#[test]
fn labeled_evaluation_runs() {
    labeled_evaluation::main().unwrap();
}

#[test]
fn sin_cubed_benchmark_runs() {
    sin_cubed_benchmark::main().unwrap();
}
