#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace confscore {

// Labels are referred to by their position 0..K-1 everywhere inside the
// library; display names only appear at file boundaries.
using Label = std::size_t;

// An ordered set of K >= 2 score labels, optionally tied to the integer
// rubric values they stand for (e.g. 2..12). Immutable once built.
class LabelSpace {
public:
    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::optional<std::vector<std::int64_t>>& ordinal_values() const noexcept { return ordinal_values_; }
    std::size_t size() const noexcept { return names_.size(); }

    const std::string& name(Label label) const;
    std::optional<Label> find(std::string_view name) const;

    bool operator==(const LabelSpace&) const = default;

private:
    friend LabelSpace make_label_space(std::vector<std::string>, std::optional<std::vector<std::int64_t>>);
    LabelSpace() = default;

    std::vector<std::string> names_;
    std::optional<std::vector<std::int64_t>> ordinal_values_;
};

// Throws Error(validation) on K < 2, duplicate names, or a bad ordinal list.
LabelSpace make_label_space(std::vector<std::string> names,
                            std::optional<std::vector<std::int64_t>> ordinal_values = std::nullopt);

// Maps a raw integer scale onto a label space through inclusive upper bounds.
// Band b covers (cut_points[b-1], cut_points[b]]; band 0 starts at scale_min.
class BandMap {
public:
    BandMap(std::int64_t scale_min, std::vector<std::int64_t> cut_points, LabelSpace target);

    std::int64_t scale_min() const noexcept { return scale_min_; }
    std::int64_t scale_max() const noexcept { return cut_points_.back(); }
    const std::vector<std::int64_t>& cut_points() const noexcept { return cut_points_; }
    const LabelSpace& target() const noexcept { return target_; }

    // Index of the first band whose cut point is >= raw.
    Label map(std::int64_t raw) const;

    bool operator==(const BandMap&) const = default;

private:
    std::int64_t scale_min_;
    std::vector<std::int64_t> cut_points_;
    LabelSpace target_;
};

inline Label map_raw_score(std::int64_t raw, const BandMap& band_map) { return band_map.map(raw); }

// The Cambridge-FCE holistic 1-40 scale: 1-18 low, 19-30 medium, 31-40 high.
BandMap fce_band_map();

} // namespace confscore
