#include "confscore/coverage_sim.hpp"

#include "confscore/conformal.hpp"
#include "confscore/error.hpp"
#include "confscore/metrics.hpp"
#include "confscore/random.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <thread>

#include <boost/random/gamma_distribution.hpp>
#include <json.hpp>

namespace confscore {

namespace {

LabelSpace synthetic_labels(std::size_t k) {
    std::vector<std::string> names;
    names.reserve(k);
    for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
    return make_label_space(std::move(names));
}

Label sample_label(std::span<const double> probs, Engine& engine) {
    const double u = uniform_unit(engine);
    double cumulative = 0.0;
    Label last_positive = 0;
    for (Label y = 0; y < probs.size(); ++y) {
        if (probs[y] <= 0.0) continue;
        cumulative += probs[y];
        last_positive = y;
        if (u < cumulative) return y;
    }
    return last_positive;
}

double mean(const std::vector<double>& values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

struct TrialOutcome {
    double coverage;
    double avg_size;
};

TrialOutcome run_trial(const SimConfig& config, std::size_t trial) {
    const std::uint64_t trial_seed = derive_seed(config.seed, trial);
    const RecordSet cal = generate_exchangeable(config.num_labels, config.n_calibration, config.sharpness,
                                                config.distortion, derive_seed(trial_seed, 0));
    const RecordSet test = generate_exchangeable(config.num_labels, config.n_test, config.sharpness,
                                                 config.distortion, derive_seed(trial_seed, 1));
    const ConformalModel model = calibrate(cal, config.alpha, config.force_nonempty);
    const auto sets = predict_batch(model, test);
    return {coverage(sets, test.truth()), avg_set_size(sets)};
}

} // namespace

void validate(const SimConfig& config) {
    if (config.num_labels < 2) fail(ErrorKind::validation, "simulation needs at least 2 labels");
    if (config.n_calibration < 1 || config.n_test < 1) {
        fail(ErrorKind::validation, "simulation needs at least one calibration and one test record");
    }
    if (config.trials < 1) fail(ErrorKind::validation, "simulation needs at least one trial");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail(ErrorKind::validation, "alpha must lie in (0, 1)");
    if (!(config.sharpness > 0.0) || !std::isfinite(config.sharpness)) {
        fail(ErrorKind::validation, "sharpness must be a positive number");
    }
    if (!(config.distortion >= 1.0) || !std::isfinite(config.distortion)) {
        fail(ErrorKind::validation, "distortion must be >= 1");
    }
}

RecordSet generate_exchangeable(std::size_t num_labels, std::size_t n, double sharpness, double distortion,
                                std::uint64_t seed) {
    SimConfig check;
    check.num_labels = num_labels;
    check.sharpness = sharpness;
    check.distortion = distortion;
    validate(check);

    Engine engine(seed);
    boost::random::gamma_distribution<double> gamma(sharpness, 1.0);
    const double exponent = 1.0 / distortion;

    std::vector<ProbRecord> records;
    records.reserve(n);
    std::vector<double> faithful(num_labels);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        // With tiny concentrations every gamma draw can underflow to zero.
        while (total <= 0.0) {
            for (double& g : faithful) g = gamma(engine);
            total = std::accumulate(faithful.begin(), faithful.end(), 0.0);
        }
        for (double& p : faithful) p /= total;
        const Label truth = sample_label(faithful, engine);

        std::vector<double> reported(num_labels);
        double reported_total = 0.0;
        for (std::size_t y = 0; y < num_labels; ++y) {
            reported[y] = distortion == 1.0 ? faithful[y] : std::pow(faithful[y], exponent);
            reported_total += reported[y];
        }
        for (double& p : reported) p /= reported_total;

        const std::string id = "r" + std::to_string(i);
        records.push_back(ProbRecord{id, checked_probs(reported, num_labels, id), truth});
    }
    return RecordSet(synthetic_labels(num_labels), std::move(records));
}

SimResult run_coverage_experiment(const SimConfig& config, unsigned threads) {
    validate(config);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.trials));

    std::vector<TrialOutcome> outcomes(config.trials);
    std::vector<std::exception_ptr> errors(config.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < config.trials; t = next++) {
            try {
                outcomes[t] = run_trial(config, t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < threads; ++i) pool.emplace_back(worker);
        worker();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    SimResult result;
    result.per_trial_coverage.reserve(config.trials);
    result.per_trial_avg_size.reserve(config.trials);
    for (const auto& o : outcomes) {
        result.per_trial_coverage.push_back(o.coverage);
        result.per_trial_avg_size.push_back(o.avg_size);
    }
    result.mean_coverage = mean(result.per_trial_coverage);
    result.mean_avg_size = mean(result.per_trial_avg_size);
    return result;
}

std::string format_sim_result(const SimConfig& config, const SimResult& result) {
    nlohmann::ordered_json doc;
    doc["config"] = {{"num_labels", config.num_labels}, {"n_calibration", config.n_calibration},
                     {"n_test", config.n_test},         {"trials", config.trials},
                     {"alpha", config.alpha},           {"sharpness", config.sharpness},
                     {"distortion", config.distortion}, {"seed", config.seed},
                     {"force_nonempty", config.force_nonempty}};
    doc["mean_coverage"] = result.mean_coverage;
    doc["mean_avg_set_size"] = result.mean_avg_size;
    doc["per_trial_coverage"] = result.per_trial_coverage;
    doc["per_trial_avg_set_size"] = result.per_trial_avg_size;
    return doc.dump(2) + "\n";
}

std::string format_trial_table(const SimResult& result) {
    std::string out = "trial\tcoverage\tavg_set_size\n";
    char buf[96];
    for (std::size_t t = 0; t < result.per_trial_coverage.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\n", t, result.per_trial_coverage[t],
                      result.per_trial_avg_size[t]);
        out += buf;
    }
    return out;
}

} // namespace confscore
