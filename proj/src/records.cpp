#include "confscore/records.hpp"

#include "confscore/error.hpp"
#include "confscore/random.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace confscore {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Sums this close to 1 are treated as already normalised, so a written
// vector reloads bit-identically.
constexpr double kExactSumSlack = 1e-12;

std::string where(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line) + ": ";
}

json parse_json(std::string_view text, std::string_view source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::validation, std::string(source) + ": malformed JSON: " + e.what());
    }
}

std::vector<std::int64_t> int_array(const json& j, std::string_view what, std::string_view source) {
    if (!j.is_array()) fail(ErrorKind::validation, std::string(source) + ": '" + std::string(what) + "' must be an array");
    std::vector<std::int64_t> out;
    for (const auto& v : j) {
        if (!v.is_number_integer()) {
            fail(ErrorKind::validation, std::string(source) + ": '" + std::string(what) + "' must hold integers");
        }
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

ProbRecord parse_record_line(const json& row, const Manifest& manifest, std::string_view source, std::size_t line) {
    const auto& labels = manifest.label_space;
    if (!row.is_object()) fail(ErrorKind::validation, where(source, line) + "record must be a JSON object");

    ProbRecord record;
    const auto id = row.find("id");
    if (id == row.end() || !id->is_string()) fail(ErrorKind::validation, where(source, line) + "missing string 'id'");
    record.id = id->get<std::string>();

    const auto probs = row.find("probs");
    if (probs == row.end() || !probs->is_array()) {
        fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "' has no 'probs' array");
    }
    std::vector<double> raw_probs;
    raw_probs.reserve(probs->size());
    for (const auto& p : *probs) {
        if (!p.is_number()) {
            fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "' has a non-numeric probability");
        }
        raw_probs.push_back(p.get<double>());
    }
    try {
        record.probs = checked_probs(raw_probs, labels.size(), record.id);
    } catch (const Error& e) {
        fail(e.kind(), where(source, line) + e.what());
    }

    const auto label = row.find("label");
    const auto raw_score = row.find("raw_score");
    if (label != row.end() && raw_score != row.end()) {
        fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "' has both 'label' and 'raw_score'");
    }
    if (label != row.end() && !label->is_null()) {
        if (!label->is_string()) {
            fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "': 'label' must be a string");
        }
        const auto name = label->get<std::string>();
        record.true_label = labels.find(name);
        if (!record.true_label) {
            fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "' has unknown label '" + name + "'");
        }
    } else if (raw_score != row.end()) {
        if (!raw_score->is_number_integer()) {
            fail(ErrorKind::validation, where(source, line) + "record '" + record.id + "': 'raw_score' must be an integer");
        }
        if (!manifest.band_map) {
            fail(ErrorKind::validation,
                 where(source, line) + "record '" + record.id + "' has a raw_score but the manifest declares no band_map");
        }
        try {
            record.true_label = manifest.band_map->map(raw_score->get<std::int64_t>());
        } catch (const Error& e) {
            fail(e.kind(), where(source, line) + "record '" + record.id + "': " + e.what());
        }
    }
    return record;
}

} // namespace

std::vector<double> checked_probs(std::span<const double> probs, std::size_t k, std::string_view id) {
    if (probs.size() != k) {
        fail(ErrorKind::validation, "record '" + std::string(id) + "' has " + std::to_string(probs.size()) +
                                        " probabilities, expected " + std::to_string(k));
    }
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            fail(ErrorKind::validation, "record '" + std::string(id) + "' has a probability outside [0, 1]");
        }
    }
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
        std::ostringstream msg;
        msg << "record '" << id << "' probabilities sum to " << std::setprecision(10) << sum << ", not 1";
        fail(ErrorKind::validation, msg.str());
    }
    std::vector<double> out(probs.begin(), probs.end());
    if (std::abs(sum - 1.0) > kExactSumSlack) {
        for (double& p : out) p /= sum;
    }
    return out;
}

RecordSet::RecordSet(LabelSpace label_space, std::vector<ProbRecord> records)
    : label_space_(std::move(label_space)), records_(std::move(records)) {
    std::unordered_set<std::string_view> ids;
    ids.reserve(records_.size());
    for (const auto& r : records_) {
        if (!ids.insert(r.id).second) fail(ErrorKind::validation, "duplicate record id '" + r.id + "'");
        if (r.probs.size() != label_space_.size()) {
            fail(ErrorKind::validation, "record '" + r.id + "' has " + std::to_string(r.probs.size()) +
                                            " probabilities, expected " + std::to_string(label_space_.size()));
        }
        if (r.true_label && *r.true_label >= label_space_.size()) {
            fail(ErrorKind::validation, "record '" + r.id + "' has true label outside the label space");
        }
    }
}

std::vector<Label> RecordSet::truth() const {
    std::vector<Label> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        if (!r.true_label) fail(ErrorKind::validation, "record '" + r.id + "' has no true label");
        out.push_back(*r.true_label);
    }
    return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
    const std::string source = path.string();
    const json doc = parse_json(read_file(path), source);
    if (!doc.is_object()) fail(ErrorKind::validation, source + ": manifest must be a JSON object");

    const auto labels = doc.find("labels");
    if (labels == doc.end() || !labels->is_array()) fail(ErrorKind::validation, source + ": missing 'labels' array");
    std::vector<std::string> names;
    for (const auto& n : *labels) {
        if (!n.is_string()) fail(ErrorKind::validation, source + ": 'labels' must hold strings");
        names.push_back(n.get<std::string>());
    }
    std::optional<std::vector<std::int64_t>> ordinal;
    if (const auto it = doc.find("ordinal_values"); it != doc.end() && !it->is_null()) {
        ordinal = int_array(*it, "ordinal_values", source);
    }

    try {
        Manifest manifest{make_label_space(std::move(names), std::move(ordinal)), std::nullopt};
        if (const auto it = doc.find("band_map"); it != doc.end() && !it->is_null()) {
            if (!it->is_object()) fail(ErrorKind::validation, "'band_map' must be an object");
            std::int64_t scale_min = 1;
            if (const auto m = it->find("scale_min"); m != it->end()) {
                if (!m->is_number_integer()) fail(ErrorKind::validation, "'scale_min' must be an integer");
                scale_min = m->get<std::int64_t>();
            }
            const auto cuts = it->find("cut_points");
            if (cuts == it->end()) fail(ErrorKind::validation, "'band_map' needs 'cut_points'");
            manifest.band_map.emplace(scale_min, int_array(*cuts, "cut_points", source), manifest.label_space);
        }
        return manifest;
    } catch (const Error& e) {
        if (std::string_view(e.what()).starts_with(source)) throw;
        fail(e.kind(), source + ": " + e.what());
    }
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
    ordered_json doc;
    doc["labels"] = manifest.label_space.names();
    if (manifest.label_space.ordinal_values()) doc["ordinal_values"] = *manifest.label_space.ordinal_values();
    if (manifest.band_map) {
        doc["band_map"] = {{"scale_min", manifest.band_map->scale_min()},
                           {"cut_points", manifest.band_map->cut_points()}};
    }
    write_file_atomic(path, doc.dump(2) + "\n");
}

RecordSet parse_records(std::string_view text, const Manifest& manifest, std::string_view source) {
    std::vector<ProbRecord> records;
    std::unordered_set<std::string> ids;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            fail(ErrorKind::validation, where(source, line_no) + "malformed record: " + e.what());
        }
        auto record = parse_record_line(row, manifest, source, line_no);
        if (!ids.insert(record.id).second) {
            fail(ErrorKind::validation, where(source, line_no) + "duplicate record id '" + record.id + "'");
        }
        records.push_back(std::move(record));
    }
    return RecordSet(manifest.label_space, std::move(records));
}

RecordSet load_records(const std::filesystem::path& path, const Manifest& manifest) {
    return parse_records(read_file(path), manifest, path.string());
}

RecordSet load_records(const std::filesystem::path& path, const std::filesystem::path& manifest_path) {
    return load_records(path, load_manifest(manifest_path));
}

std::string format_records(const RecordSet& set) {
    std::string out;
    for (const auto& r : set.records()) {
        ordered_json row;
        row["id"] = r.id;
        row["probs"] = r.probs;
        if (r.true_label) row["label"] = set.label_space().name(*r.true_label);
        out += row.dump();
        out += '\n';
    }
    return out;
}

void write_records(const RecordSet& set, const std::filesystem::path& path) {
    write_file_atomic(path, format_records(set));
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
    const auto [f_train, f_cal, f_test] = spec.fractions;
    if (!(f_train > 0.0 && f_cal > 0.0 && f_test > 0.0) || std::abs(f_train + f_cal + f_test - 1.0) > 1e-9) {
        fail(ErrorKind::usage, "split fractions must be positive and sum to 1");
    }
    // The slack keeps products such as 0.7 * 10 from landing on the wrong side
    // of a rounding boundary.
    constexpr double slack = 1e-9;
    const double nd = static_cast<double>(n);
    SplitSizes sizes;
    sizes.train = std::min(n, static_cast<std::size_t>(std::floor(f_train * nd + 0.5 + slack)));
    const std::size_t rest = n - sizes.train;
    const double cal_share = static_cast<double>(rest) * f_cal / (f_cal + f_test);
    sizes.calibration = std::min(rest, static_cast<std::size_t>(std::floor(cal_share + 0.5 + slack)));
    sizes.test = rest - sizes.calibration;
    if (sizes.train == 0 || sizes.calibration == 0 || sizes.test == 0) {
        fail(ErrorKind::validation, "cannot split " + std::to_string(n) +
                                        " records so that every part receives at least one record");
    }
    return sizes;
}

SplitResult split(const RecordSet& records, const SplitSpec& spec) {
    const SplitSizes sizes = split_sizes(records.size(), spec);

    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Engine engine(spec.seed);
    shuffle(std::span<std::size_t>(order), engine);

    auto slice = [&](std::size_t begin, std::size_t count) {
        std::vector<ProbRecord> part;
        part.reserve(count);
        for (std::size_t i = begin; i < begin + count; ++i) part.push_back(records[order[i]]);
        return RecordSet(records.label_space(), std::move(part));
    };
    return SplitResult{slice(0, sizes.train), slice(sizes.train, sizes.calibration),
                       slice(sizes.train + sizes.calibration, sizes.test)};
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) fail(ErrorKind::io, "error while reading '" + path.string() + "'");
    return std::move(buffer).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            fail(ErrorKind::io, "error while writing '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorKind::io, "cannot move output into place at '" + path.string() + "'");
    }
}

std::string file_sha256(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::io, "SHA-256 failed for '" + path.string() + "'");
    }
    std::ostringstream hex;
    hex << std::hex << std::setfill('0');
    for (unsigned int i = 0; i < length; ++i) hex << std::setw(2) << static_cast<int>(digest[i]);
    return hex.str();
}

} // namespace confscore
