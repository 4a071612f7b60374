#include "confscore/label_space.hpp"

#include "confscore/error.hpp"

#include <algorithm>
#include <set>

namespace confscore {

const std::string& LabelSpace::name(Label label) const {
    if (label >= names_.size()) {
        fail(ErrorKind::validation, "label index " + std::to_string(label) + " outside label space of size " +
                                        std::to_string(names_.size()));
    }
    return names_[label];
}

std::optional<Label> LabelSpace::find(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<Label>(it - names_.begin());
}

LabelSpace make_label_space(std::vector<std::string> names, std::optional<std::vector<std::int64_t>> ordinal_values) {
    if (names.size() < 2) {
        fail(ErrorKind::validation, "label space needs at least 2 labels, got " + std::to_string(names.size()));
    }
    std::set<std::string_view> seen;
    for (const auto& name : names) {
        if (!seen.insert(name).second) fail(ErrorKind::validation, "duplicate label name '" + name + "'");
    }
    if (ordinal_values) {
        if (ordinal_values->size() != names.size()) {
            fail(ErrorKind::validation, "ordinal_values has " + std::to_string(ordinal_values->size()) +
                                            " entries for " + std::to_string(names.size()) + " labels");
        }
        if (std::adjacent_find(ordinal_values->begin(), ordinal_values->end(), std::greater_equal<>()) !=
            ordinal_values->end()) {
            fail(ErrorKind::validation, "ordinal_values must be strictly increasing");
        }
    }
    LabelSpace space;
    space.names_ = std::move(names);
    space.ordinal_values_ = std::move(ordinal_values);
    return space;
}

BandMap::BandMap(std::int64_t scale_min, std::vector<std::int64_t> cut_points, LabelSpace target)
    : scale_min_(scale_min), cut_points_(std::move(cut_points)), target_(std::move(target)) {
    if (cut_points_.size() != target_.size()) {
        fail(ErrorKind::validation, "band map has " + std::to_string(cut_points_.size()) + " cut points for " +
                                        std::to_string(target_.size()) + " labels");
    }
    if (std::adjacent_find(cut_points_.begin(), cut_points_.end(), std::greater_equal<>()) != cut_points_.end()) {
        fail(ErrorKind::validation, "band map cut points must be strictly increasing");
    }
    if (cut_points_.front() < scale_min_) {
        fail(ErrorKind::validation, "first cut point " + std::to_string(cut_points_.front()) +
                                        " lies below scale minimum " + std::to_string(scale_min_));
    }
}

Label BandMap::map(std::int64_t raw) const {
    if (raw < scale_min_ || raw > scale_max()) {
        fail(ErrorKind::validation, "raw score " + std::to_string(raw) + " outside scale [" +
                                        std::to_string(scale_min_) + ", " + std::to_string(scale_max()) + "]");
    }
    const auto it = std::lower_bound(cut_points_.begin(), cut_points_.end(), raw);
    return static_cast<Label>(it - cut_points_.begin());
}

BandMap fce_band_map() {
    return BandMap(1, {18, 30, 40}, make_label_space({"low", "medium", "high"}));
}

} // namespace confscore
