#pragma once

#include "confscore/records.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

inline confscore::RecordSet make_set(const confscore::LabelSpace& labels,
                                     const std::vector<std::vector<double>>& probs,
                                     const std::vector<std::size_t>& truth = {}) {
    std::vector<confscore::ProbRecord> records;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        confscore::ProbRecord r{"r" + std::to_string(i), probs[i], std::nullopt};
        if (i < truth.size()) r.true_label = truth[i];
        records.push_back(std::move(r));
    }
    return confscore::RecordSet(labels, std::move(records));
}

// Random probability vector, normalised in double precision.
inline std::vector<double> random_probs(std::size_t k, std::mt19937_64& rng) {
    std::exponential_distribution<double> exp(1.0);
    std::vector<double> p(k);
    double sum = 0.0;
    for (double& v : p) sum += (v = exp(rng));
    for (double& v : p) v /= sum;
    return p;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("confscore_" + tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    confscore::write_file_atomic(path, text);
}

} // namespace testing_support
