#pragma once

#include "confscore/conformal.hpp"
#include "confscore/label_space.hpp"
#include "confscore/records.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace confscore {

// K x K counts indexed (true label, predicted label).
class ConfusionMatrix {
public:
    ConfusionMatrix(std::size_t k, std::span<const Label> pred, std::span<const Label> truth);

    std::size_t classes() const noexcept { return k_; }
    std::uint64_t at(Label truth, Label pred) const { return counts_[truth * k_ + pred]; }
    std::uint64_t total() const noexcept { return total_; }
    std::uint64_t row_total(Label truth) const;
    std::uint64_t col_total(Label pred) const;

private:
    std::size_t k_;
    std::uint64_t total_ = 0;
    std::vector<std::uint64_t> counts_;
};

// Argmax, ties to the lowest index.
Label point_prediction(std::span<const double> probs);

double accuracy(std::span<const Label> pred, std::span<const Label> truth);

// Unweighted mean of per-class F1 over all K classes; a class that never
// occurs in either sequence scores 0.
double macro_f1(std::span<const Label> pred, std::span<const Label> truth, std::size_t k);

// Quadratic-weighted Cohen's kappa with weights (i - j)^2 / (K - 1)^2.
// Returns 1.0 when the expected disagreement vanishes and the sequences agree.
double qwk(std::span<const Label> pred, std::span<const Label> truth, std::size_t k);

double coverage(std::span<const PredictionSet> sets, std::span<const Label> truth);
double avg_set_size(std::span<const PredictionSet> sets);
double singleton_rate(std::span<const PredictionSet> sets);

// accuracy * sqrt(K / avg_size). Can exceed 1. avg_size == 0 means every
// set was empty and is reported as Error(calibration).
double uacc(double accuracy, std::size_t k, double avg_size);

struct EvalReport {
    std::string dataset;
    std::string scorer;
    double alpha = 0.0;
    std::size_t num_labels = 0;
    std::size_t n_test = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double qwk = 0.0;
    double coverage = 0.0;
    double avg_set_size = 0.0;
    double singleton_rate = 0.0;
    double empty_set_rate = 0.0;
    double uacc = 0.0;

    bool operator==(const EvalReport&) const = default;
};

// Point metrics from argmax predictions and set metrics from the model's
// prediction sets over one test set. All test records need a true label.
EvalReport evaluate(const ConformalModel& model, const RecordSet& test);

std::string format_report(const EvalReport& report);
EvalReport parse_report(std::string_view text, std::string_view source);
EvalReport load_report(const std::filesystem::path& path);

// Aligned plain-text table, one row per report, metrics to two decimals:
// Dataset, Model, QWK, Acc., F1, Coverage, Avg |C|, UAcc.
std::string render_table(std::span<const EvalReport> reports);

} // namespace confscore
