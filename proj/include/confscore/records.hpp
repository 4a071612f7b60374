#pragma once

#include "confscore/label_space.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confscore {

inline constexpr double kProbSumTolerance = 1e-6;

// One scored example: a probability vector over the label space and,
// when known, the index of the true label.
struct ProbRecord {
    std::string id;
    std::vector<double> probs;
    std::optional<Label> true_label;

    bool operator==(const ProbRecord&) const = default;
};

// Checks a probability vector against a label count. Entries must lie in
// [0,1] and sum to 1 within kProbSumTolerance. Vectors whose sum is already
// within a few ulps of 1 come back unchanged; others are divided by their sum.
// `id` is only used in the diagnostic.
std::vector<double> checked_probs(std::span<const double> probs, std::size_t k, std::string_view id);

// A validated collection of records sharing one label space. Ids are unique.
class RecordSet {
public:
    RecordSet(LabelSpace label_space, std::vector<ProbRecord> records);

    const LabelSpace& label_space() const noexcept { return label_space_; }
    const std::vector<ProbRecord>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }
    const ProbRecord& operator[](std::size_t i) const { return records_[i]; }

    // True labels in record order; throws Error(validation) naming the first
    // record without one.
    std::vector<Label> truth() const;

    bool operator==(const RecordSet&) const = default;

private:
    LabelSpace label_space_;
    std::vector<ProbRecord> records_;
};

// Contents of a manifest file: the label space plus an optional band map for
// records that carry raw integer scores.
struct Manifest {
    LabelSpace label_space;
    std::optional<BandMap> band_map;
};

Manifest load_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

RecordSet load_records(const std::filesystem::path& path, const Manifest& manifest);
RecordSet load_records(const std::filesystem::path& path, const std::filesystem::path& manifest_path);

// Serialises to one JSON object per line with `id`, `probs` and, when present,
// `label` (the display name). Doubles are written in shortest round-trip form.
std::string format_records(const RecordSet& set);
void write_records(const RecordSet& set, const std::filesystem::path& path);

// Parses the line-delimited record format from memory. `source` names the
// input in diagnostics.
RecordSet parse_records(std::string_view text, const Manifest& manifest, std::string_view source);

struct SplitSpec {
    std::array<double, 3> fractions{0.70, 0.15, 0.15};  // train, calibration, test
    std::uint64_t seed = 42;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t calibration = 0;
    std::size_t test = 0;

    bool operator==(const SplitSizes&) const = default;
};

struct SplitResult {
    RecordSet train;
    RecordSet calibration;
    RecordSet test;
};

// Part sizes for n records: train = round(f_train * n) (halves up); the
// remainder is shared between calibration and test in proportion to their
// fractions, rounding halves toward calibration.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

// Seeded Fisher-Yates shuffle (see random.hpp) followed by slicing into
// train / calibration / test in permuted order.
SplitResult split(const RecordSet& records, const SplitSpec& spec);

// Lower-case hex SHA-256 of a file's bytes.
std::string file_sha256(const std::filesystem::path& path);

// Writes `contents` to a sibling temporary file and renames it over `path`,
// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

} // namespace confscore
