#include "confscore/metrics.hpp"

#include "confscore/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace confscore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_paired(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        fail(ErrorKind::validation, std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                                        std::to_string(b) + ")");
    }
    if (a == 0) fail(ErrorKind::validation, std::string(what) + ": empty input");
}

} // namespace

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::span<const Label> pred, std::span<const Label> truth)
    : k_(k), counts_(k * k, 0) {
    if (pred.size() != truth.size()) fail(ErrorKind::validation, "confusion matrix: length mismatch");
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] >= k || truth[i] >= k) fail(ErrorKind::validation, "confusion matrix: label out of range");
        ++counts_[truth[i] * k + pred[i]];
    }
    total_ = pred.size();
}

std::uint64_t ConfusionMatrix::row_total(Label truth) const {
    std::uint64_t sum = 0;
    for (Label p = 0; p < k_; ++p) sum += at(truth, p);
    return sum;
}

std::uint64_t ConfusionMatrix::col_total(Label pred) const {
    std::uint64_t sum = 0;
    for (Label t = 0; t < k_; ++t) sum += at(t, pred);
    return sum;
}

Label point_prediction(std::span<const double> probs) {
    if (probs.empty()) fail(ErrorKind::validation, "point prediction of an empty probability vector");
    return static_cast<Label>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double accuracy(std::span<const Label> pred, std::span<const Label> truth) {
    check_paired(pred.size(), truth.size(), "accuracy");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double macro_f1(std::span<const Label> pred, std::span<const Label> truth, std::size_t k) {
    check_paired(pred.size(), truth.size(), "macro_f1");
    const ConfusionMatrix cm(k, pred, truth);
    double sum = 0.0;
    for (Label c = 0; c < k; ++c) {
        const auto tp = static_cast<double>(cm.at(c, c));
        const auto fp = static_cast<double>(cm.col_total(c)) - tp;
        const auto fn = static_cast<double>(cm.row_total(c)) - tp;
        const double denom = 2.0 * tp + fp + fn;
        if (denom > 0.0) sum += 2.0 * tp / denom;
    }
    return sum / static_cast<double>(k);
}

double qwk(std::span<const Label> pred, std::span<const Label> truth, std::size_t k) {
    check_paired(pred.size(), truth.size(), "qwk");
    if (k < 2) fail(ErrorKind::validation, "qwk needs at least 2 labels");
    const ConfusionMatrix cm(k, pred, truth);
    const double n = static_cast<double>(cm.total());
    const double scale = static_cast<double>((k - 1) * (k - 1));

    std::vector<double> rows(k), cols(k);
    for (Label i = 0; i < k; ++i) {
        rows[i] = static_cast<double>(cm.row_total(i)) / n;
        cols[i] = static_cast<double>(cm.col_total(i)) / n;
    }
    double observed = 0.0, expected = 0.0;
    for (Label i = 0; i < k; ++i) {
        for (Label j = 0; j < k; ++j) {
            const double d = static_cast<double>(i) - static_cast<double>(j);
            const double w = d * d / scale;
            observed += w * static_cast<double>(cm.at(i, j)) / n;
            expected += w * rows[i] * cols[j];
        }
    }
    if (expected == 0.0) {
        if (observed == 0.0) return 1.0;
        fail(ErrorKind::validation, "qwk: expected disagreement is zero but the sequences differ");
    }
    return 1.0 - observed / expected;
}

double coverage(std::span<const PredictionSet> sets, std::span<const Label> truth) {
    check_paired(sets.size(), truth.size(), "coverage");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < sets.size(); ++i) hits += sets[i].contains(truth[i]);
    return static_cast<double>(hits) / static_cast<double>(sets.size());
}

double avg_set_size(std::span<const PredictionSet> sets) {
    if (sets.empty()) fail(ErrorKind::validation, "avg_set_size: empty input");
    std::size_t total = 0;
    for (const auto& s : sets) total += s.size();
    return static_cast<double>(total) / static_cast<double>(sets.size());
}

double singleton_rate(std::span<const PredictionSet> sets) {
    if (sets.empty()) fail(ErrorKind::validation, "singleton_rate: empty input");
    const auto singles = std::count_if(sets.begin(), sets.end(), [](const auto& s) { return s.size() == 1; });
    return static_cast<double>(singles) / static_cast<double>(sets.size());
}

double uacc(double accuracy, std::size_t k, double avg_size) {
    if (avg_size == 0.0) {
        fail(ErrorKind::calibration, "UAcc is undefined: every prediction set is empty");
    }
    if (!(avg_size > 0.0) || k < 2 || !(accuracy >= 0.0 && accuracy <= 1.0)) {
        fail(ErrorKind::validation, "uacc: arguments out of range");
    }
    return accuracy * std::sqrt(static_cast<double>(k) / avg_size);
}

EvalReport evaluate(const ConformalModel& model, const RecordSet& test) {
    if (test.empty()) fail(ErrorKind::validation, "evaluate: test set is empty");
    const std::vector<Label> truth = test.truth();
    std::vector<Label> pred;
    pred.reserve(test.size());
    for (const auto& r : test.records()) pred.push_back(point_prediction(r.probs));
    const std::vector<PredictionSet> sets = predict_batch(model, test);
    const std::size_t k = model.label_space.size();

    EvalReport report;
    report.alpha = model.alpha;
    report.num_labels = k;
    report.n_test = test.size();
    report.accuracy = accuracy(pred, truth);
    report.macro_f1 = macro_f1(pred, truth, k);
    report.qwk = qwk(pred, truth, k);
    report.coverage = coverage(sets, truth);
    report.avg_set_size = avg_set_size(sets);
    report.singleton_rate = singleton_rate(sets);
    report.empty_set_rate = static_cast<double>(std::count_if(sets.begin(), sets.end(),
                                                              [](const auto& s) { return s.empty(); })) /
                            static_cast<double>(sets.size());
    report.uacc = uacc(report.accuracy, k, report.avg_set_size);
    return report;
}

std::string format_report(const EvalReport& report) {
    ordered_json doc;
    doc["dataset"] = report.dataset;
    doc["scorer"] = report.scorer;
    doc["alpha"] = report.alpha;
    doc["num_labels"] = report.num_labels;
    doc["n_test"] = report.n_test;
    doc["accuracy"] = report.accuracy;
    doc["macro_f1"] = report.macro_f1;
    doc["qwk"] = report.qwk;
    doc["coverage"] = report.coverage;
    doc["avg_set_size"] = report.avg_set_size;
    doc["singleton_rate"] = report.singleton_rate;
    doc["empty_set_rate"] = report.empty_set_rate;
    doc["uacc"] = report.uacc;
    return doc.dump(2) + "\n";
}

EvalReport parse_report(std::string_view text, std::string_view source) {
    try {
        const json doc = json::parse(text);
        EvalReport r;
        r.dataset = doc.value("dataset", std::string{});
        r.scorer = doc.value("scorer", std::string{});
        r.alpha = doc.at("alpha").get<double>();
        r.num_labels = doc.at("num_labels").get<std::size_t>();
        r.n_test = doc.at("n_test").get<std::size_t>();
        r.accuracy = doc.at("accuracy").get<double>();
        r.macro_f1 = doc.at("macro_f1").get<double>();
        r.qwk = doc.at("qwk").get<double>();
        r.coverage = doc.at("coverage").get<double>();
        r.avg_set_size = doc.at("avg_set_size").get<double>();
        r.singleton_rate = doc.at("singleton_rate").get<double>();
        r.empty_set_rate = doc.value("empty_set_rate", 0.0);
        r.uacc = doc.at("uacc").get<double>();
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::validation, std::string(source) + ": invalid report: " + e.what());
    }
}

EvalReport load_report(const std::filesystem::path& path) { return parse_report(read_file(path), path.string()); }

std::string render_table(std::span<const EvalReport> reports) {
    std::size_t dataset_w = 7, scorer_w = 5;  // "Dataset", "Model"
    for (const auto& r : reports) {
        dataset_w = std::max(dataset_w, r.dataset.size());
        scorer_w = std::max(scorer_w, r.scorer.size());
    }
    auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%8.2f", v);
        return std::string(buf);
    };

    auto head = [](const std::string& s) { return std::string(8 - s.size(), ' ') + s; };
    std::string out = pad("Dataset", dataset_w) + "  " + pad("Model", scorer_w) + "  " + head("QWK") + " " +
                      head("Acc.") + " " + head("F1") + " " + head("Coverage") + " " + head("Avg |C|") + " " +
                      head("UAcc") + "\n";
    for (const auto& r : reports) {
        out += pad(r.dataset, dataset_w) + "  " + pad(r.scorer, scorer_w) + "  " + num(r.qwk) + " " +
               num(r.accuracy) + " " + num(r.macro_f1) + " " + num(r.coverage) + " " + num(r.avg_set_size) + " " +
               num(r.uacc) + "\n";
    }
    return out;
}

} // namespace confscore
