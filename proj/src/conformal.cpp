#include "confscore/conformal.hpp"

#include "confscore/error.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace confscore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(ErrorKind::calibration, "alpha must lie strictly between 0 and 1, got " + std::to_string(alpha));
    }
}

void check_width(std::span<const double> probs, const LabelSpace& labels) {
    if (probs.size() != labels.size()) {
        fail(ErrorKind::validation, "probability vector has " + std::to_string(probs.size()) +
                                        " entries for a label space of size " + std::to_string(labels.size()));
    }
}

} // namespace

bool PredictionSet::contains(Label label) const { return std::binary_search(members.begin(), members.end(), label); }

double lac_score(std::span<const double> probs, Label label) {
    if (label >= probs.size()) {
        fail(ErrorKind::validation, "label " + std::to_string(label) + " out of range for " +
                                        std::to_string(probs.size()) + " probabilities");
    }
    return 1.0 - probs[label];
}

std::size_t conformal_rank(std::size_t n, double alpha) {
    check_alpha(alpha);
    const double target = static_cast<double>(n + 1) * (1.0 - alpha);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(target * (1.0 - 1e-9))));
}

double conformal_quantile(std::span<const double> scores, double alpha) {
    if (scores.empty()) fail(ErrorKind::calibration, "calibration set is empty");
    const std::size_t rank = conformal_rank(scores.size(), alpha);
    if (rank > scores.size()) return 1.0;
    std::vector<double> work(scores.begin(), scores.end());
    const auto nth = work.begin() + static_cast<std::ptrdiff_t>(rank - 1);
    std::nth_element(work.begin(), nth, work.end());
    return *nth;
}

ConformalModel calibrate(const RecordSet& calibration, double alpha, bool force_nonempty) {
    check_alpha(alpha);
    if (calibration.empty()) fail(ErrorKind::calibration, "calibration set is empty");

    std::vector<double> scores;
    scores.reserve(calibration.size());
    for (const auto& r : calibration.records()) {
        if (!r.true_label) fail(ErrorKind::calibration, "calibration record '" + r.id + "' has no true label");
        scores.push_back(lac_score(r.probs, *r.true_label));
    }

    return ConformalModel{.alpha = alpha,
                          .q_alpha = conformal_quantile(scores, alpha),
                          .n_calibration = calibration.size(),
                          .label_space = calibration.label_space(),
                          .force_nonempty = force_nonempty,
                          .calibration_sha256 = {}};
}

PredictionSet predict_set(const ConformalModel& model, std::span<const double> probs, std::string record_id) {
    check_width(probs, model.label_space);
    PredictionSet set{std::move(record_id), {}};
    for (Label y = 0; y < probs.size(); ++y) {
        if (1.0 - probs[y] <= model.q_alpha) set.members.push_back(y);
    }
    if (set.members.empty() && model.force_nonempty) {
        const auto best = std::max_element(probs.begin(), probs.end());
        set.members.push_back(static_cast<Label>(best - probs.begin()));
    }
    return set;
}

std::vector<PredictionSet> predict_batch(const ConformalModel& model, const RecordSet& records) {
    if (!(records.label_space() == model.label_space)) {
        fail(ErrorKind::validation, "records and model use different label spaces");
    }
    std::vector<PredictionSet> sets;
    sets.reserve(records.size());
    for (const auto& r : records.records()) sets.push_back(predict_set(model, r.probs, r.id));
    return sets;
}

std::string format_model(const ConformalModel& model) {
    ordered_json doc;
    doc["alpha"] = model.alpha;
    doc["q_alpha"] = model.q_alpha;
    doc["n_calibration"] = model.n_calibration;
    doc["labels"] = model.label_space.names();
    if (model.label_space.ordinal_values()) doc["ordinal_values"] = *model.label_space.ordinal_values();
    doc["force_nonempty"] = model.force_nonempty;
    doc["calibration_sha256"] = model.calibration_sha256;
    return doc.dump(2) + "\n";
}

ConformalModel parse_model(std::string_view text, std::string_view source) {
    const std::string src(source);
    try {
        const json doc = json::parse(text);
        std::optional<std::vector<std::int64_t>> ordinal;
        if (doc.contains("ordinal_values")) ordinal = doc["ordinal_values"].get<std::vector<std::int64_t>>();
        ConformalModel model{
            .alpha = doc.at("alpha").get<double>(),
            .q_alpha = doc.at("q_alpha").get<double>(),
            .n_calibration = doc.at("n_calibration").get<std::size_t>(),
            .label_space = make_label_space(doc.at("labels").get<std::vector<std::string>>(), std::move(ordinal)),
            .force_nonempty = doc.value("force_nonempty", false),
            .calibration_sha256 = doc.value("calibration_sha256", std::string{}),
        };
        if (!(model.alpha > 0.0 && model.alpha < 1.0) || !(model.q_alpha >= 0.0 && model.q_alpha <= 1.0) ||
            model.n_calibration < 1) {
            fail(ErrorKind::validation, src + ": model fields out of range");
        }
        return model;
    } catch (const json::exception& e) {
        fail(ErrorKind::validation, src + ": invalid model file: " + e.what());
    } catch (const Error& e) {
        if (std::string_view(e.what()).starts_with(src)) throw;
        fail(e.kind(), src + ": " + e.what());
    }
}

void write_model(const ConformalModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, format_model(model));
}

ConformalModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

std::string format_predictions(const std::vector<PredictionSet>& sets, const LabelSpace& labels) {
    std::string out;
    for (const auto& s : sets) {
        ordered_json row;
        row["id"] = s.record_id;
        auto names = json::array();
        for (Label y : s.members) names.push_back(labels.name(y));
        row["set"] = std::move(names);
        out += row.dump();
        out += '\n';
    }
    return out;
}

} // namespace confscore
