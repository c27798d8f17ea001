#pragma once

#include "countgest/gesture.hpp"
#include "countgest/training.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace countgest {

Pretraining parse_pretraining(const std::string& text);
GestureConvention parse_convention(const std::string& text);
FeedbackMode parse_feedback(const std::string& text);
const char* to_string(Pretraining value);
const char* to_string(GestureConvention value);
const char* to_string(FeedbackMode value);

/// Everything the commands need, resolved from defaults, an optional JSON
/// config file, the COUNTGEST_OUT_DIR environment variable and flag
/// overrides (in that order of precedence, flags strongest).
struct ExperimentConfig {
    int study = 1;
    int condition = 1;
    Pretraining pretraining = Pretraining::none;
    GestureConvention convention = GestureConvention::stay_at_last;
    bool gesture_loop = false;
    std::size_t hidden = 0;      // 0 = protocol default
    double learning_rate = 0.0;  // 0 = protocol default
    std::size_t sub_epochs = 0;  // 0 = protocol default
    std::size_t repetitions = 15;
    std::size_t test_sets = 50;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;
    double desk_scale = 1.0;
    FeedbackMode feedback = FeedbackMode::free_running;
    std::string out_dir = "results/run";
    std::string gesture_table_path = "gesture_table.txt";
    ArmGeometry arm;

    /// Reads a JSON config file. Unknown keys are an error.
    void load_file(const std::string& path);
    /// Applies COUNTGEST_OUT_DIR when set.
    void apply_environment();
    /// Resolves protocol defaults and applies the desk-scale factor to
    /// repetitions, sub-epoch counts and test sets.
    TrainSpec resolve() const;
};

int cmd_build_gestures(const ExperimentConfig& config);
int cmd_run(const ExperimentConfig& config);

struct CompareArgs {
    std::vector<std::string> inputs; // run directories (or repetitions.tsv paths)
    std::string metric = "counting"; // counting | gesture | stage1b_gesture
    std::string out_path = "anova.tsv";
};
int cmd_compare(const CompareArgs& args);

struct ReportArgs {
    std::string results_dir = "results";
    std::string out_dir = "report";
};
int cmd_report(const ReportArgs& args);

} // namespace countgest
