#pragma once

#include "ministl/harness/report_files.hpp"
#include "ministl/harness/train.hpp"

namespace ministl::harness {

/// Trains (or loads) every suite entry, evaluates it on the clean test
/// split and each requested perturbation, and writes report files plus
/// sample frame strips under cfg.out_dir. A failing entry becomes a row
/// marked failed instead of aborting the table.
ResultTable run_benchmark(const BenchConfig& cfg);

}  // namespace ministl::harness
