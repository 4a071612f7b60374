#pragma once

#include "confscore/records.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace confscore {

struct SimConfig {
    std::size_t num_labels = 3;
    std::size_t n_calibration = 1815;
    std::size_t n_test = 1815;
    std::size_t trials = 200;
    double alpha = 0.1;
    double sharpness = 1.0;   // Dirichlet concentration per label
    double distortion = 1.0;  // temperature on reported probabilities, >= 1
    std::uint64_t seed = 42;
    bool force_nonempty = false;
};

struct SimResult {
    std::vector<double> per_trial_coverage;
    std::vector<double> per_trial_avg_size;
    double mean_coverage = 0.0;
    double mean_avg_size = 0.0;

    bool operator==(const SimResult&) const = default;
};

// Throws Error(validation) when a field is out of range.
void validate(const SimConfig& config);

// Synthetic records with labels c0..c{K-1} and ids r0..r{n-1}. For each
// record a faithful vector p ~ Dirichlet(sharpness, ..., sharpness) is drawn,
// the true label is sampled from p, and the reported probabilities are
// p^(1/distortion) renormalised.
RecordSet generate_exchangeable(std::size_t num_labels, std::size_t n, double sharpness, double distortion,
                                std::uint64_t seed);

// Each trial t uses seed derive_seed(config.seed, t); its calibration and
// test sets use derive_seed(trial_seed, 0) and derive_seed(trial_seed, 1).
// Trials run on up to `threads` workers (0 = hardware concurrency) and are
// gathered in trial order.
SimResult run_coverage_experiment(const SimConfig& config, unsigned threads = 0);

std::string format_sim_result(const SimConfig& config, const SimResult& result);
// Tab-separated `trial coverage avg_set_size` rows with a header line.
std::string format_trial_table(const SimResult& result);

} // namespace confscore
