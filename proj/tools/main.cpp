#include "countgest/cli.hpp"
#include "countgest/error.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <stdexcept>
#include <string>

using namespace countgest;

int main(int argc, char** argv) {
    CLI::App app{"Counting-with-pointing-gestures experiment lab"};
    app.require_subcommand(1);

    std::string config_path;
    ExperimentConfig flags;
    std::string pretraining_text;
    std::string convention_text;
    std::string feedback_text;

    CLI::App* build = app.add_subcommand("build-gestures",
                                         "Build and save the canonical gesture table");
    build->add_option("--config", config_path, "JSON config file");
    build->add_option("--table", flags.gesture_table_path, "output path for the table");
    build->add_option("--shoulder-x", flags.arm.shoulder_offset_x, "shoulder forward offset (m)");
    build->add_option("--shoulder-y", flags.arm.shoulder_offset_y, "shoulder lateral offset (m)");
    build->add_option("--shoulder-z", flags.arm.shoulder_offset_z, "shoulder height offset (m)");
    build->add_option("--upper-arm", flags.arm.upper_arm_length, "upper arm length (m)");
    build->add_option("--forearm", flags.arm.forearm_length, "forearm length (m)");
    build->add_option("--line-forward", flags.arm.line_forward, "target line distance (m)");
    build->add_option("--line-height", flags.arm.line_height, "target line height (m)");
    build->add_option("--line-length", flags.arm.line_length, "target line length (m)");

    CLI::App* run = app.add_subcommand("run", "Train and evaluate one experiment");
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--study", flags.study, "1 or 2");
    run->add_option("--condition", flags.condition, "Study-1 condition id (1..8)");
    run->add_option("--pretraining", pretraining_text, "none, 1a, 1b or both (study 2)");
    run->add_option("--convention", convention_text, "stay or base");
    run->add_flag("--loop,!--no-loop", flags.gesture_loop, "wire the gesture loop (study 2)");
    run->add_option("--hidden", flags.hidden, "hidden units (0 = protocol default)");
    run->add_option("--lr", flags.learning_rate, "learning rate (0 = protocol default)");
    run->add_option("--sub-epochs", flags.sub_epochs, "sub-epochs (0 = protocol default)");
    run->add_option("--repetitions", flags.repetitions, "independent repetitions");
    run->add_option("--test-sets", flags.test_sets, "test sets per repetition");
    run->add_option("--seed", flags.base_seed, "base seed (repetition r uses seed + r)");
    run->add_option("--threads", flags.threads, "worker threads across repetitions");
    run->add_option("--desk-scale", flags.desk_scale,
                    "scale factor for repetitions, sub-epochs and test sets");
    run->add_option("--feedback", feedback_text, "free or forced (Jordan loop training)");
    run->add_option("--out", flags.out_dir, "output directory");
    run->add_option("--table", flags.gesture_table_path, "gesture table file");

    CompareArgs compare_args;
    CLI::App* compare = app.add_subcommand("compare", "One-way ANOVA between runs");
    compare->add_option("inputs", compare_args.inputs, "run directories")->expected(-2);
    compare->add_option("--metric", compare_args.metric, "counting, gesture or stage1b_gesture");
    compare->add_option("--out", compare_args.out_path, "output file");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "Consolidate completed runs");
    report->add_option("--dir", report_args.results_dir, "directory holding run outputs");
    report->add_option("--out", report_args.out_dir, "report output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (build->parsed() || run->parsed()) {
            CLI::App* cmd = build->parsed() ? build : run;
            ExperimentConfig config;
            if (!config_path.empty()) config.load_file(config_path);
            config.apply_environment();
            if (cmd->count("--table")) config.gesture_table_path = flags.gesture_table_path;
            if (build->parsed()) {
                if (cmd->count("--shoulder-x")) config.arm.shoulder_offset_x = flags.arm.shoulder_offset_x;
                if (cmd->count("--shoulder-y")) config.arm.shoulder_offset_y = flags.arm.shoulder_offset_y;
                if (cmd->count("--shoulder-z")) config.arm.shoulder_offset_z = flags.arm.shoulder_offset_z;
                if (cmd->count("--upper-arm")) config.arm.upper_arm_length = flags.arm.upper_arm_length;
                if (cmd->count("--forearm")) config.arm.forearm_length = flags.arm.forearm_length;
                if (cmd->count("--line-forward")) config.arm.line_forward = flags.arm.line_forward;
                if (cmd->count("--line-height")) config.arm.line_height = flags.arm.line_height;
                if (cmd->count("--line-length")) config.arm.line_length = flags.arm.line_length;
                return cmd_build_gestures(config);
            }
            if (cmd->count("--study")) config.study = flags.study;
            if (cmd->count("--condition")) config.condition = flags.condition;
            if (cmd->count("--pretraining")) config.pretraining = parse_pretraining(pretraining_text);
            if (cmd->count("--convention")) config.convention = parse_convention(convention_text);
            if (cmd->count("--loop") || cmd->count("--no-loop")) {
                config.gesture_loop = flags.gesture_loop;
            }
            if (cmd->count("--hidden")) config.hidden = flags.hidden;
            if (cmd->count("--lr")) config.learning_rate = flags.learning_rate;
            if (cmd->count("--sub-epochs")) config.sub_epochs = flags.sub_epochs;
            if (cmd->count("--repetitions")) config.repetitions = flags.repetitions;
            if (cmd->count("--test-sets")) config.test_sets = flags.test_sets;
            if (cmd->count("--seed")) config.base_seed = flags.base_seed;
            if (cmd->count("--threads")) config.threads = flags.threads;
            if (cmd->count("--desk-scale")) config.desk_scale = flags.desk_scale;
            if (cmd->count("--feedback")) config.feedback = parse_feedback(feedback_text);
            if (cmd->count("--out")) config.out_dir = flags.out_dir;
            return cmd_run(config);
        }
        if (compare->parsed()) return cmd_compare(compare_args);
        if (report->parsed()) return cmd_report(report_args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "failure: %s\n", e.what());
        return 2;
    }
    return 0;
}
