#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grkbs/config.hpp"

namespace grkbs {

struct MetricsRecord {
    std::size_t step = 0;
    double objective = 0.0;
    std::size_t atom_count = 0;
    double certificate_sup = 0.0;
    std::int64_t wall_ms = 0;
};

/// JSON-lines writer, one record per line, keys exactly
/// "step","objective","atom_count","certificate_sup","wall_ms".
void emit_metrics(const std::vector<MetricsRecord>& records, const std::string& path);

/// Runs the experiment described by the config and writes its artifacts
/// into output_dir. Returns the process exit status: 0 on success, 2 when
/// a training run ends without certificate convergence, 1 on any error
/// (the message goes to stderr).
int run_experiment(const ExperimentConfig& cfg);

}  // namespace grkbs
