#pragma once

#include "confscore/label_space.hpp"
#include "confscore/records.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace confscore {

// A calibrated split-conformal wrapper around LAC scores.
struct ConformalModel {
    double alpha = 0.1;
    double q_alpha = 1.0;
    std::size_t n_calibration = 0;
    LabelSpace label_space;
    bool force_nonempty = false;
    std::string calibration_sha256;  // empty when not calibrated from a file

    bool operator==(const ConformalModel&) const = default;
};

struct PredictionSet {
    std::string record_id;
    std::vector<Label> members;  // sorted ascending, distinct

    std::size_t size() const noexcept { return members.size(); }
    bool empty() const noexcept { return members.empty(); }
    bool contains(Label label) const;

    bool operator==(const PredictionSet&) const = default;
};

// Nonconformity of `label` under `probs`: 1 - probs[label].
double lac_score(std::span<const double> probs, Label label);

// Rank (1-based) of the calibration order statistic used as threshold:
// ceil((n + 1)(1 - alpha)). May exceed n, in which case every label is
// admitted. A relative slack of 1e-9 absorbs the binary representation of
// alpha so that e.g. n = 9, alpha = 0.1 yields exactly 9.
std::size_t conformal_rank(std::size_t n, double alpha);

// Selects the rank-th smallest score, or 1.0 when rank > n. No interpolation.
double conformal_quantile(std::span<const double> scores, double alpha);

// Every record must carry a true label. Throws Error(calibration) on an empty
// set, a missing label (naming the record) or alpha outside (0, 1).
ConformalModel calibrate(const RecordSet& calibration, double alpha, bool force_nonempty = false);

// { y : 1 - probs[y] <= q_alpha }. With force_nonempty an empty result is
// replaced by the argmax label (lowest index on ties).
PredictionSet predict_set(const ConformalModel& model, std::span<const double> probs, std::string record_id = {});

// Order-preserving predict_set over a record set sharing the model's labels.
std::vector<PredictionSet> predict_batch(const ConformalModel& model, const RecordSet& records);

// Calibrated-model document (JSON).
std::string format_model(const ConformalModel& model);
ConformalModel parse_model(std::string_view text, std::string_view source);
void write_model(const ConformalModel& model, const std::filesystem::path& path);
ConformalModel load_model(const std::filesystem::path& path);

// Line-delimited `{"id": ..., "set": [names...]}` rows.
std::string format_predictions(const std::vector<PredictionSet>& sets, const LabelSpace& labels);

} // namespace confscore
