#pragma once

#include <span>
#include <string>

#include "nnpipe/pipeline.hpp"

namespace nnpipe {

// Relative throughput of models sharing hardware:
//   (sum_k multi[k] / single[k] / hw_count - 1) * 100
// Throws Error on a zero single rate, mismatched lengths or hw_count 0.
double bench_relative_throughput(std::span<const double> single_rates,
                                 std::span<const double> multi_rates, unsigned hw_count);

// Aligned text table of a run.
std::string format_report(const RunReport& report);
// JSON object with the same fields (sinks, queues, elapsed_s, copies, ...).
std::string report_json(const RunReport& report, int indent = 2);

}  // namespace nnpipe
