//! Operation counting, storage accounting and the benchmark harness.

pub mod bench;
pub mod complexity;
pub mod counter;
pub mod storage;

pub use bench::{run_benchmark, BenchConfig, BenchReport, BenchRow};
pub use complexity::{ComplexityRow, SymbolicCost, COMPLEXITY_TABLE};
pub use counter::{measure, CounterScope, OpClass, OpCounts, OperationCounter, Phase};
pub use storage::{storage_batch, storage_unbatched, StorageMode, StorageModel};
