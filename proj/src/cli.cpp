#include "countgest/cli.hpp"

#include "countgest/error.hpp"
#include "countgest/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace countgest {

namespace fs = std::filesystem;

namespace {

std::size_t scale_count(std::size_t value, double factor) {
    const double scaled = std::llround(static_cast<double>(value) * factor);
    return static_cast<std::size_t>(std::max(1.0, scaled));
}

std::ofstream create_file(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write to '" + path.string() + "'");
    }
    return out;
}

std::string percent(double fraction) { return format_double(fraction * 100.0); }

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return fields;
}

struct RepetitionsFile {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

RepetitionsFile read_repetitions_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path.string() + "'");
    }
    RepetitionsFile file;
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError(path.string() + ": empty repetitions file");
    }
    file.columns = split_tabs(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != file.columns.size()) {
            throw ConfigError(path.string() + ": ragged row");
        }
        file.rows.push_back(std::move(fields));
    }
    return file;
}

fs::path repetitions_path(const std::string& input) {
    fs::path path(input);
    if (fs::is_directory(path)) path /= "repetitions.tsv";
    return path;
}

std::vector<double> metric_column(const fs::path& path, const std::string& metric) {
    const RepetitionsFile file = read_repetitions_file(path);
    const auto it = std::find(file.columns.begin(), file.columns.end(), metric);
    if (it == file.columns.end()) {
        throw std::invalid_argument(path.string() + ": no column named '" + metric + "'");
    }
    const std::size_t index = static_cast<std::size_t>(it - file.columns.begin());
    std::vector<double> values;
    values.reserve(file.rows.size());
    for (const auto& row : file.rows) {
        if (row[index] == "-") {
            throw std::invalid_argument(path.string() + ": the '" + metric +
                                        "' metric was not recorded for this run");
        }
        values.push_back(std::stod(row[index]));
    }
    return values;
}

void write_anova_row(std::ostream& out, const std::string& a, const std::string& b,
                     const std::string& metric, const AnovaResult& result) {
    out << a << '\t' << b << '\t' << metric << '\t' << format_double(result.f) << '\t'
        << result.df_between << '\t' << result.df_within << '\t' << format_double(result.p)
        << '\n';
}

} // namespace

Pretraining parse_pretraining(const std::string& text) {
    if (text == "none" || text == "no") return Pretraining::none;
    if (text == "1a" || text == "stage1a") return Pretraining::stage1a;
    if (text == "1b" || text == "stage1b") return Pretraining::stage1b;
    if (text == "both") return Pretraining::both;
    throw ConfigError("unknown pretraining option '" + text + "' (none, 1a, 1b, both)");
}

GestureConvention parse_convention(const std::string& text) {
    if (text == "S" || text == "stay" || text == "stay_at_last") {
        return GestureConvention::stay_at_last;
    }
    if (text == "B" || text == "base" || text == "go_to_base") {
        return GestureConvention::go_to_base;
    }
    throw ConfigError("unknown gesture convention '" + text + "' (stay or base)");
}

FeedbackMode parse_feedback(const std::string& text) {
    if (text == "free" || text == "free_running") return FeedbackMode::free_running;
    if (text == "forced" || text == "teacher_forced") return FeedbackMode::teacher_forced;
    throw ConfigError("unknown feedback mode '" + text + "' (free or forced)");
}

const char* to_string(Pretraining value) {
    switch (value) {
    case Pretraining::none: return "none";
    case Pretraining::stage1a: return "stage1a";
    case Pretraining::stage1b: return "stage1b";
    case Pretraining::both: return "both";
    }
    return "?";
}

const char* to_string(GestureConvention value) {
    return value == GestureConvention::stay_at_last ? "stay_at_last" : "go_to_base";
}

const char* to_string(FeedbackMode value) {
    return value == FeedbackMode::free_running ? "free_running" : "teacher_forced";
}

void ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    nlohmann::json json;
    try {
        in >> json;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    if (!json.is_object()) {
        throw ConfigError(path + ": top-level JSON value must be an object");
    }
    try {
        for (const auto& [key, value] : json.items()) {
            if (key == "study") study = value.get<int>();
            else if (key == "condition") condition = value.get<int>();
            else if (key == "pretraining") pretraining = parse_pretraining(value.get<std::string>());
            else if (key == "convention") convention = parse_convention(value.get<std::string>());
            else if (key == "gesture_loop") gesture_loop = value.get<bool>();
            else if (key == "hidden") hidden = value.get<std::size_t>();
            else if (key == "learning_rate") learning_rate = value.get<double>();
            else if (key == "sub_epochs") sub_epochs = value.get<std::size_t>();
            else if (key == "repetitions") repetitions = value.get<std::size_t>();
            else if (key == "test_sets") test_sets = value.get<std::size_t>();
            else if (key == "base_seed") base_seed = value.get<std::uint64_t>();
            else if (key == "threads") threads = value.get<std::size_t>();
            else if (key == "desk_scale") desk_scale = value.get<double>();
            else if (key == "feedback") feedback = parse_feedback(value.get<std::string>());
            else if (key == "out_dir") out_dir = value.get<std::string>();
            else if (key == "gesture_table") gesture_table_path = value.get<std::string>();
            else if (key == "arm") {
                for (const auto& [akey, avalue] : value.items()) {
                    if (akey == "shoulder_offset_x") arm.shoulder_offset_x = avalue.get<double>();
                    else if (akey == "shoulder_offset_y") arm.shoulder_offset_y = avalue.get<double>();
                    else if (akey == "shoulder_offset_z") arm.shoulder_offset_z = avalue.get<double>();
                    else if (akey == "upper_arm_length") arm.upper_arm_length = avalue.get<double>();
                    else if (akey == "forearm_length") arm.forearm_length = avalue.get<double>();
                    else if (akey == "line_forward") arm.line_forward = avalue.get<double>();
                    else if (akey == "line_height") arm.line_height = avalue.get<double>();
                    else if (akey == "line_length") arm.line_length = avalue.get<double>();
                    else throw ConfigError(path + ": unknown arm key '" + akey + "'");
                }
            } else {
                throw ConfigError(path + ": unknown key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void ExperimentConfig::apply_environment() {
    if (const char* dir = std::getenv("COUNTGEST_OUT_DIR")) {
        if (*dir != '\0') out_dir = dir;
    }
}

TrainSpec ExperimentConfig::resolve() const {
    TrainSpec spec;
    if (study == 1) {
        spec = TrainSpec::study1(condition, convention);
    } else if (study == 2) {
        spec = TrainSpec::study2(pretraining, convention, gesture_loop);
    } else {
        throw ConfigError("study must be 1 or 2");
    }
    if (hidden != 0) spec.hidden_size = hidden;
    if (learning_rate > 0.0) spec.learning_rate = learning_rate;
    if (sub_epochs != 0) spec.sub_epochs = sub_epochs;
    spec.repetitions = repetitions;
    spec.test_sets = test_sets;
    spec.base_seed = base_seed;
    spec.threads = threads;
    spec.feedback_mode = feedback;
    if (desk_scale <= 0.0) {
        throw ConfigError("desk_scale must be positive");
    }
    if (desk_scale != 1.0) {
        spec.sub_epochs = scale_count(spec.sub_epochs, desk_scale);
        spec.repetitions = scale_count(spec.repetitions, desk_scale);
        spec.test_sets = scale_count(spec.test_sets, desk_scale);
        spec.stage1a_epochs = scale_count(spec.stage1a_epochs, desk_scale);
        spec.stage1b_sub_epochs = scale_count(spec.stage1b_sub_epochs, desk_scale);
    }
    return spec;
}

int cmd_build_gestures(const ExperimentConfig& config) {
    const ArmModel arm(config.arm);
    const GestureTable table = build_gesture_table(arm);
    const fs::path path(config.gesture_table_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_gesture_table(table, path.string());
    std::printf("gesture table written to %s\n", path.string().c_str());
    std::printf("variance carried by 3 components: %.4f\n", table.variance_fraction);
    std::printf("minimum pairwise distance: %.4f\n", table.min_pairwise_distance());
    return 0;
}

int cmd_run(const ExperimentConfig& config) {
    const TrainSpec spec = config.resolve();
    if (!fs::exists(config.gesture_table_path)) {
        throw ConfigError("gesture table '" + config.gesture_table_path +
                          "' not found; run the build-gestures command first");
    }
    const GestureTable table = load_gesture_table(config.gesture_table_path);

    const RunReport report = run_experiment(spec, table);

    const fs::path out(config.out_dir);
    fs::create_directories(out / "traces");
    fs::create_directories(out / "checkpoints");

    {
        std::ofstream info = create_file(out / "run_info.txt");
        info << "format countgest-run-info v1\n";
        info << "study " << config.study << '\n';
        info << "condition " << spec.condition.condition_id << '\n';
        info << "pretraining " << (spec.staged ? to_string(spec.pretraining) : "none") << '\n';
        info << "convention " << to_string(spec.condition.convention) << '\n';
        info << "gesture_loop " << (spec.condition.jordan_loop ? 1 : 0) << '\n';
        info << "feedback " << to_string(spec.feedback_mode) << '\n';
        info << "hidden_size " << spec.hidden_size << '\n';
        info << "learning_rate " << format_double(spec.learning_rate) << '\n';
        info << "sub_epochs " << spec.sub_epochs << '\n';
        info << "repetitions " << spec.repetitions << '\n';
        info << "test_sets " << spec.test_sets << '\n';
        info << "base_seed " << spec.base_seed << '\n';
        info << "desk_scale " << format_double(config.desk_scale) << '\n';
        if (spec.staged) {
            info << "stage1a_hidden " << spec.stage1a_hidden << '\n';
            info << "stage1a_epochs " << spec.stage1a_epochs << '\n';
            info << "stage1a_learning_rate " << format_double(spec.stage1a_learning_rate) << '\n';
            info << "stage1b_hidden " << spec.stage1b_hidden << '\n';
            info << "stage1b_sub_epochs " << spec.stage1b_sub_epochs << '\n';
            info << "stage1b_learning_rate " << format_double(spec.stage1b_learning_rate) << '\n';
        }
        info << "gesture_table " << config.gesture_table_path << '\n';
    }

    {
        std::ofstream reps = create_file(out / "repetitions.tsv");
        reps << "repetition\tseed\tcounting\tgesture\tstage1b_gesture\n";
        for (const RepetitionResult& rep : report.repetitions) {
            reps << rep.repetition << '\t' << rep.seed << '\t';
            reps << (report.has_counting ? percent(rep.accuracy.counting_accuracy) : "-");
            reps << '\t';
            reps << (report.has_gesture ? percent(rep.accuracy.gesture_accuracy) : "-");
            reps << '\t';
            reps << (rep.stage1b_gesture_accuracy >= 0.0 ? percent(rep.stage1b_gesture_accuracy)
                                                         : "-");
            reps << '\n';
        }
    }

    {
        std::ofstream summary = create_file(out / "summary.tsv");
        summary << "metric\tmean\tsd\trepetitions\n";
        if (report.has_counting) {
            summary << "counting\t" << percent(report.counting.mean) << '\t'
                    << percent(report.counting.sd) << '\t' << report.repetitions.size() << '\n';
        }
        if (report.has_gesture) {
            summary << "gesture\t" << percent(report.gesture.mean) << '\t'
                    << percent(report.gesture.sd) << '\t' << report.repetitions.size() << '\n';
        }
    }

    for (const RepetitionResult& rep : report.repetitions) {
        char name[32];
        std::snprintf(name, sizeof name, "rep_%03zu", rep.repetition);
        std::ofstream trace = create_file(out / "traces" / (std::string(name) + ".tsv"));
        trace << "sub_epoch\ttotal_loss\tnumber_loss\tgesture_loss\n";
        for (std::size_t s = 0; s < rep.trace.total_loss.size(); ++s) {
            trace << (s + 1) << '\t' << format_double(rep.trace.total_loss[s]) << '\t'
                  << format_double(rep.trace.number_loss[s]) << '\t'
                  << format_double(rep.trace.gesture_loss[s]) << '\n';
        }
        save_checkpoint(rep.net, (out / "checkpoints" / (std::string(name) + ".net")).string());
    }

    if (report.has_counting) {
        std::printf("counting: %.2f (%.2f) %% over %zu repetitions\n",
                    report.counting.mean * 100.0, report.counting.sd * 100.0,
                    report.repetitions.size());
    }
    if (report.has_gesture) {
        std::printf("gestures: %.2f (%.2f) %% over %zu repetitions\n",
                    report.gesture.mean * 100.0, report.gesture.sd * 100.0,
                    report.repetitions.size());
    }
    std::printf("results written to %s\n", out.string().c_str());
    return 0;
}

int cmd_compare(const CompareArgs& args) {
    if (args.inputs.size() < 2) {
        throw ConfigError("compare needs at least two run directories");
    }
    std::vector<std::string> labels;
    std::vector<std::vector<double>> groups;
    for (const std::string& input : args.inputs) {
        labels.push_back(input);
        groups.push_back(metric_column(repetitions_path(input), args.metric));
    }

    std::ostringstream body;
    body << "group_a\tgroup_b\tmetric\tf\tdf_between\tdf_within\tp\n";
    const AnovaResult omnibus = one_way_anova(groups);
    write_anova_row(body, "(all)", "(all)", args.metric, omnibus);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            const AnovaResult pair = one_way_anova({groups[i], groups[j]});
            write_anova_row(body, labels[i], labels[j], args.metric, pair);
        }
    }

    const fs::path out_path(args.out_path);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    std::ofstream out = create_file(out_path);
    out << body.str();
    std::fputs(body.str().c_str(), stdout);
    return 0;
}

int cmd_report(const ReportArgs& args) {
    const fs::path root(args.results_dir);
    if (!fs::is_directory(root)) {
        throw ConfigError("'" + args.results_dir + "' is not a directory");
    }
    std::vector<fs::path> run_dirs;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == "summary.tsv") {
            run_dirs.push_back(entry.path().parent_path());
        }
    }
    if (run_dirs.empty()) {
        throw ConfigError("no completed runs (summary.tsv) under '" + args.results_dir + "'");
    }
    std::sort(run_dirs.begin(), run_dirs.end());

    const fs::path out(args.out_dir);
    fs::create_directories(out / "series");

    std::ofstream table = create_file(out / "results_table.tsv");
    table << "run\tcounting_mean\tcounting_sd\tgesture_mean\tgesture_sd\trepetitions\n";
    for (const fs::path& dir : run_dirs) {
        std::string counting_mean = "-", counting_sd = "-";
        std::string gesture_mean = "-", gesture_sd = "-";
        std::string repetitions = "-";
        std::ifstream in(dir / "summary.tsv");
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            const auto fields = split_tabs(line);
            if (fields.size() != 4) continue;
            if (fields[0] == "counting") {
                counting_mean = fields[1];
                counting_sd = fields[2];
                repetitions = fields[3];
            } else if (fields[0] == "gesture") {
                gesture_mean = fields[1];
                gesture_sd = fields[2];
                repetitions = fields[3];
            }
        }
        const std::string label = fs::relative(dir, root).generic_string();
        table << label << '\t' << counting_mean << '\t' << counting_sd << '\t' << gesture_mean
              << '\t' << gesture_sd << '\t' << repetitions << '\n';

        // mean counting-loss curve across the run's repetitions
        const fs::path traces = dir / "traces";
        if (!fs::is_directory(traces)) continue;
        std::vector<fs::path> trace_files;
        for (const auto& entry : fs::directory_iterator(traces)) {
            if (entry.is_regular_file() && entry.path().extension() == ".tsv") {
                trace_files.push_back(entry.path());
            }
        }
        if (trace_files.empty()) continue;
        std::sort(trace_files.begin(), trace_files.end());
        std::vector<double> sums;
        std::vector<std::size_t> counts;
        for (const fs::path& file : trace_files) {
            std::ifstream tin(file);
            std::string tline;
            std::getline(tin, tline); // header
            std::size_t row = 0;
            while (std::getline(tin, tline)) {
                const auto fields = split_tabs(tline);
                if (fields.size() != 4) continue;
                if (row >= sums.size()) {
                    sums.resize(row + 1, 0.0);
                    counts.resize(row + 1, 0);
                }
                sums[row] += std::stod(fields[2]);
                counts[row] += 1;
                ++row;
            }
        }
        std::string series_name = label;
        std::replace(series_name.begin(), series_name.end(), '/', '_');
        std::ofstream series = create_file(out / "series" / (series_name + ".counting_loss.tsv"));
        series << "sub_epoch\tmean_number_loss\n";
        for (std::size_t s = 0; s < sums.size(); ++s) {
            if (counts[s] == 0) continue;
            series << (s + 1) << '\t'
                   << format_double(sums[s] / static_cast<double>(counts[s])) << '\n';
        }
    }
    std::printf("report written to %s\n", out.string().c_str());
    return 0;
}

} // namespace countgest
