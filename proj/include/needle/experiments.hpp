#pragma once

#include <string>

#include "needle/config.hpp"

namespace needle {

// NEEDLE_WORKERS if set and positive, otherwise the hardware concurrency.
int workerCount();

// Runs one command and writes its artifacts under cfg.output. Returns a JSON summary.
// `accept` prints one line per criterion to stdout as it goes.
std::string runExperiment(const ExperimentConfig& cfg, int* exitCode = nullptr);

}  // namespace needle
