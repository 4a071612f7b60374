// confscore: split, calibrate, predict, evaluate, simulate, report.
//
// Data goes to files (or stdout when --out is omitted); diagnostics go to
// stderr as a single line. Exit codes: 0 ok, 1 usage, 2 invalid input,
// 3 calibration failure, 4 I/O failure.

#include "confscore/conformal.hpp"
#include "confscore/coverage_sim.hpp"
#include "confscore/error.hpp"
#include "confscore/metrics.hpp"
#include "confscore/records.hpp"

#include <charconv>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace fs = std::filesystem;
using namespace confscore;

namespace {

struct Options {
    std::string input;
    std::vector<std::string> inputs;
    std::string manifest;
    std::string model;
    std::string out;
    std::string trial_table;
    std::string fractions = "0.7,0.15,0.15";
    std::string format;
    std::string dataset;
    std::string scorer;
    double alpha = 0.1;
    std::uint64_t seed = 42;
    bool force_nonempty = false;
    SimConfig sim;
};

const auto open_unit_interval = CLI::Validator(
    [](std::string& value) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(value);
        } catch (...) {
            return "not a number: " + value;
        }
        return v > 0.0 && v < 1.0 ? std::string{} : "must lie strictly between 0 and 1";
    },
    "(0,1)");

SplitSpec parse_split_spec(const Options& opt) {
    SplitSpec spec;
    spec.seed = opt.seed;
    std::string_view rest = opt.fractions;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto comma = rest.find(',');
        if ((i < 2) == (comma == std::string_view::npos)) fail(ErrorKind::usage, "--fractions expects three values a,b,c");
        const auto field = rest.substr(0, comma);
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), spec.fractions[i]);
        if (ec != std::errc{} || end != field.data() + field.size()) {
            fail(ErrorKind::usage, "--fractions: cannot parse '" + std::string(field) + "'");
        }
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return spec;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text << std::flush;
    } else {
        write_file_atomic(out, text);
    }
}

void run_split(const Options& opt) {
    const SplitSpec spec = parse_split_spec(opt);
    const RecordSet records = load_records(opt.input, opt.manifest);
    const SplitResult parts = split(records, spec);

    const fs::path dir(opt.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::io, "cannot create output directory '" + dir.string() + "'");

    nlohmann::ordered_json report;
    report["seed"] = spec.seed;
    report["fractions"] = spec.fractions;
    report["input"] = fs::path(opt.input).filename().string();
    report["counts"] = {{"total", records.size()},
                        {"train", parts.train.size()},
                        {"calibration", parts.calibration.size()},
                        {"test", parts.test.size()}};

    const std::vector<std::pair<fs::path, std::string>> outputs = {
        {dir / "train.jsonl", format_records(parts.train)},
        {dir / "calibration.jsonl", format_records(parts.calibration)},
        {dir / "test.jsonl", format_records(parts.test)},
        {dir / "split_report.json", report.dump(2) + "\n"},
    };
    std::vector<fs::path> written;
    try {
        for (const auto& [path, text] : outputs) {
            write_file_atomic(path, text);
            written.push_back(path);
        }
    } catch (...) {
        for (const auto& path : written) fs::remove(path, ec);
        throw;
    }
}

void run_calibrate(const Options& opt) {
    const RecordSet cal = load_records(opt.input, opt.manifest);
    ConformalModel model = calibrate(cal, opt.alpha, opt.force_nonempty);
    model.calibration_sha256 = file_sha256(opt.input);
    emit(opt.out, format_model(model));
}

ConformalModel model_for(const Options& opt) {
    ConformalModel model = load_model(opt.model);
    if (opt.force_nonempty) model.force_nonempty = true;
    return model;
}

void run_predict(const Options& opt) {
    const ConformalModel model = model_for(opt);
    const RecordSet records = load_records(opt.input, opt.manifest);
    emit(opt.out, format_predictions(predict_batch(model, records), model.label_space));
}

void run_evaluate(const Options& opt) {
    const ConformalModel model = model_for(opt);
    const RecordSet test = load_records(opt.input, opt.manifest);
    EvalReport report = evaluate(model, test);
    report.dataset = opt.dataset.empty() ? fs::path(opt.input).stem().string() : opt.dataset;
    report.scorer = opt.scorer.empty() ? fs::path(opt.model).stem().string() : opt.scorer;
    emit(opt.out, opt.format == "table" ? render_table(std::span(&report, 1)) : format_report(report));
}

void run_simulate(const Options& opt) {
    SimConfig config = opt.sim;
    config.alpha = opt.alpha;
    config.seed = opt.seed;
    config.force_nonempty = opt.force_nonempty;
    const SimResult result = run_coverage_experiment(config);
    const std::string table = opt.trial_table.empty() ? std::string{} : format_trial_table(result);
    emit(opt.out, format_sim_result(config, result));
    if (!opt.trial_table.empty()) write_file_atomic(opt.trial_table, table);
}

void run_report(const Options& opt) {
    std::vector<EvalReport> reports;
    for (const auto& path : opt.inputs) reports.push_back(load_report(path));
    if (opt.format == "machine") {
        auto doc = nlohmann::ordered_json::array();
        for (const auto& r : reports) doc.push_back(nlohmann::ordered_json::parse(format_report(r)));
        emit(opt.out, doc.dump(2) + "\n");
    } else {
        emit(opt.out, render_table(reports));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformal prediction sets and uncertainty-aware metrics for ordinal scorers", "confscore"};
    app.require_subcommand(1);
    Options opt;

    auto add_alpha = [&](CLI::App* cmd) {
        cmd->add_option("--alpha", opt.alpha, "Risk level")->check(open_unit_interval)->capture_default_str();
    };
    auto* split_cmd = app.add_subcommand("split", "Seeded train/calibration/test split of a record file");
    split_cmd->add_option("records", opt.input, "Record file")->required();
    split_cmd->add_option("--manifest", opt.manifest, "Manifest file")->required();
    split_cmd->add_option("--fractions", opt.fractions, "Train,calibration,test fractions")->capture_default_str();
    split_cmd->add_option("--seed", opt.seed, "Shuffle seed")->capture_default_str();
    split_cmd->add_option("--out", opt.out, "Output directory")->required();

    auto* cal_cmd = app.add_subcommand("calibrate", "Compute the conformal threshold from calibration records");
    cal_cmd->add_option("records", opt.input, "Calibration record file")->required();
    cal_cmd->add_option("--manifest", opt.manifest, "Manifest file")->required();
    add_alpha(cal_cmd);
    cal_cmd->add_flag("--force-nonempty", opt.force_nonempty, "Fall back to the argmax label for empty sets");
    cal_cmd->add_option("--out", opt.out, "Model file (default: stdout)");

    auto* pred_cmd = app.add_subcommand("predict", "Emit prediction sets");
    pred_cmd->add_option("records", opt.input, "Record file")->required();
    pred_cmd->add_option("--manifest", opt.manifest, "Manifest file")->required();
    pred_cmd->add_option("--model", opt.model, "Calibrated model file")->required();
    pred_cmd->add_flag("--force-nonempty", opt.force_nonempty, "Override the model's empty-set policy");
    pred_cmd->add_option("--out", opt.out, "Prediction file (default: stdout)");

    auto* eval_cmd = app.add_subcommand("evaluate", "Score a calibrated model on labelled test records");
    eval_cmd->add_option("records", opt.input, "Test record file")->required();
    eval_cmd->add_option("--manifest", opt.manifest, "Manifest file")->required();
    eval_cmd->add_option("--model", opt.model, "Calibrated model file")->required();
    eval_cmd->add_flag("--force-nonempty", opt.force_nonempty, "Override the model's empty-set policy");
    eval_cmd->add_option("--dataset", opt.dataset, "Dataset name for reports (default: record file stem)");
    eval_cmd->add_option("--scorer", opt.scorer, "Model name for reports (default: model file stem)");
    eval_cmd->add_option("--out", opt.out, "Report file (default: stdout)");

    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo coverage experiment on synthetic data");
    sim_cmd->add_option("--labels", opt.sim.num_labels, "Number of labels K")->capture_default_str();
    sim_cmd->add_option("--n-cal", opt.sim.n_calibration, "Calibration records per trial")->capture_default_str();
    sim_cmd->add_option("--n-test", opt.sim.n_test, "Test records per trial")->capture_default_str();
    sim_cmd->add_option("--trials", opt.sim.trials, "Number of trials")->capture_default_str();
    sim_cmd->add_option("--sharpness", opt.sim.sharpness, "Dirichlet concentration")->capture_default_str();
    sim_cmd->add_option("--distortion", opt.sim.distortion, "Temperature on reported probabilities")
        ->capture_default_str();
    sim_cmd->add_option("--seed", opt.seed, "Experiment seed")->capture_default_str();
    add_alpha(sim_cmd);
    sim_cmd->add_flag("--force-nonempty", opt.force_nonempty, "Fall back to the argmax label for empty sets");
    sim_cmd->add_option("--out", opt.out, "Result file (default: stdout)");
    sim_cmd->add_option("--trial-table", opt.trial_table, "Optional per-trial TSV file");

    auto* report_cmd = app.add_subcommand("report", "Tabulate one or more evaluation reports");
    report_cmd->add_option("reports", opt.inputs, "Report files")->required();
    report_cmd->add_option("--out", opt.out, "Output file (default: stdout)");

    for (auto* cmd : {eval_cmd, report_cmd}) {
        cmd->add_option("--format", opt.format, "Output format: table or machine")
            ->check(CLI::IsMember({"table", "machine"}));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::usage);
    }

    if (opt.format.empty()) opt.format = report_cmd->parsed() ? "table" : "machine";

    try {
        if (split_cmd->parsed()) run_split(opt);
        else if (cal_cmd->parsed()) run_calibrate(opt);
        else if (pred_cmd->parsed()) run_predict(opt);
        else if (eval_cmd->parsed()) run_evaluate(opt);
        else if (sim_cmd->parsed()) run_simulate(opt);
        else if (report_cmd->parsed()) run_report(opt);
    } catch (const Error& e) {
        std::cerr << "confscore: error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "confscore: error: " << e.what() << "\n";
        return static_cast<int>(ErrorKind::io);
    }
    return 0;
}
