#pragma once

#include "countgest/datagen.hpp"
#include "countgest/evaluation.hpp"
#include "countgest/network.hpp"
#include "countgest/optim.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace countgest {

enum class Pretraining { none, stage1a, stage1b, both };

/// Full description of one experiment. The study1/study2 factories fill in
/// each protocol's published values; the stage parameters only matter when
/// staged is set.
struct TrainSpec {
    ConditionSpec condition;
    std::size_t hidden_size = 68;
    double learning_rate = 0.005;
    std::size_t sub_epochs = 20000;
    std::size_t repetitions = 15;
    std::size_t test_sets = 50;
    std::uint64_t base_seed = 1;
    std::size_t threads = 1;
    FeedbackMode feedback_mode = FeedbackMode::free_running;

    bool staged = false;
    Pretraining pretraining = Pretraining::none;
    std::size_t stage1a_hidden = 20;
    std::size_t stage1a_epochs = 7000;
    double stage1a_learning_rate = 0.01;
    std::size_t stage1b_hidden = 48;
    std::size_t stage1b_sub_epochs = 20000;
    double stage1b_learning_rate = 0.02;

    /// Study-1 protocol for one condition: hidden 68, 20000 sub-epochs,
    /// learning rate 0.005 (0.02 for condition 2).
    static TrainSpec study1(int condition,
                            GestureConvention convention = GestureConvention::stay_at_last);
    /// Study-2 protocol: condition-3 wiring (condition 4 with the loop),
    /// hidden 68, learning rate 0.001, plus the requested pre-training.
    static TrainSpec study2(Pretraining pretraining, GestureConvention convention,
                            bool gesture_loop);
};

/// Adam state for every parameter matrix of one network.
struct OptimizerStates {
    AdamState w_hidden;
    AdamState b_hidden;
    AdamState w_numbers;
    AdamState b_numbers;
    AdamState w_gestures;
    AdamState b_gestures;

    OptimizerStates(const BlockConfig& cfg, double learning_rate);
};

struct SubEpochLoss {
    double total = 0.0;
    double numbers = 0.0;
    double gestures = 0.0;
};

/// One optimizer step: gradients summed over every sequence of the set
/// (off and on), then a single Adam update per parameter.
SubEpochLoss train_sub_epoch(NetworkState& net, const ConditionSpec& cond,
                             const SubEpochSet& set, FeedbackMode mode, OptimizerStates& opt);

struct TrainTrace {
    std::vector<double> total_loss;
    std::vector<double> number_loss;
    std::vector<double> gesture_loss;
    double wall_seconds = 0.0; // informational only, never persisted
};

struct TrainResult {
    NetworkState net;
    TrainTrace trace;
};

/// Trains an existing network on freshly generated sub-epoch sets.
TrainResult train_network(NetworkState net, const ConditionSpec& cond, double learning_rate,
                          std::size_t sub_epochs, FeedbackMode mode, const GestureTable& table,
                          Rng& rng);

/// Fresh network plus train_network, under one condition's wiring.
TrainResult train_condition(const ConditionSpec& cond, std::size_t hidden_size,
                            double learning_rate, std::size_t sub_epochs, FeedbackMode mode,
                            const GestureTable& table, Rng& rng);

/// The fixed two-sequence recitation set: trigger off with silent targets,
/// trigger on with words 1..10 then two silent steps.
SequencePair recitation_pair();

/// Number recitation pre-training: trigger-only to numbers, fixed set.
TrainResult train_stage1a(const TrainSpec& spec, Rng& rng);

/// True when the net recites 1..10 under trigger-on and stays silent under
/// trigger-off.
bool recitation_correct(const NetworkState& net);

/// Pointing pre-training: the condition-2 protocol at the stage-1B size.
TrainResult train_stage1b(const TrainSpec& spec, const GestureTable& table, Rng& rng);

/// Final counting-with-gestures training from a stitched network. Either
/// pre-trained source may be null.
TrainResult train_stage2(const TrainSpec& spec, const NetworkState* pre_a,
                         const NetworkState* pre_b, const GestureTable& table, Rng& rng);

struct RepetitionResult {
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    AccuracyReport accuracy;
    double stage1b_gesture_accuracy = -1.0; // fraction; negative when not applicable
    TrainTrace trace;
    NetworkState net;
};

struct RunReport {
    TrainSpec spec;
    std::vector<RepetitionResult> repetitions;
    bool has_counting = false;
    bool has_gesture = false;
    Aggregate counting; // over per-repetition accuracy fractions
    Aggregate gesture;
};

/// One repetition of the experiment: pre-training stages as requested,
/// the main training, then evaluation on fresh test sets. Fully determined
/// by (spec, repetition).
RepetitionResult run_repetition(const TrainSpec& spec, const GestureTable& table,
                                std::size_t repetition);

/// All repetitions (optionally across threads; the report is identical
/// either way) plus the aggregate statistics.
RunReport run_experiment(const TrainSpec& spec, const GestureTable& table);

} // namespace countgest
