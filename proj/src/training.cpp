#include "countgest/training.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>

namespace countgest {

namespace {

void add_into(Matrix& dst, const Matrix& src) {
    double* d = dst.data();
    const double* s = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

Gradients zero_gradients(const BlockConfig& cfg) {
    Gradients g;
    g.w_hidden = Matrix(cfg.hidden_size, cfg.input_width());
    g.b_hidden = Matrix(1, cfg.hidden_size);
    if (cfg.use_number_output) {
        g.w_numbers = Matrix(kNumberUnits, cfg.hidden_size);
        g.b_numbers = Matrix(1, kNumberUnits);
    }
    if (cfg.use_gesture_output) {
        g.w_gestures = Matrix(kGestureUnits, cfg.hidden_size);
        g.b_gestures = Matrix(1, kGestureUnits);
    }
    return g;
}

void check_condition_matches(const ConditionSpec& cond, const NetworkState& net) {
    if (!(cond.block_config(net.cfg.hidden_size) == net.cfg)) {
        throw std::invalid_argument("training: condition wiring does not match the network");
    }
}

// per-repetition stream tags; fixed so a stage's result does not depend on
// which other stages run
constexpr std::uint64_t kStreamStage1a = 1;
constexpr std::uint64_t kStreamStage1b = 2;
constexpr std::uint64_t kStreamMain = 3;
constexpr std::uint64_t kStreamTest = 4;

} // namespace

TrainSpec TrainSpec::study1(int condition, GestureConvention convention) {
    TrainSpec spec;
    spec.condition = ConditionSpec::study1(condition, convention);
    spec.hidden_size = 68;
    spec.learning_rate = condition == 2 ? 0.02 : 0.005;
    spec.sub_epochs = 20000;
    return spec;
}

TrainSpec TrainSpec::study2(Pretraining pretraining, GestureConvention convention,
                            bool gesture_loop) {
    TrainSpec spec;
    spec.condition = ConditionSpec::study1(gesture_loop ? 4 : 3, convention);
    spec.hidden_size = 68;
    spec.learning_rate = 0.001;
    spec.sub_epochs = 20000;
    spec.staged = true;
    spec.pretraining = pretraining;
    return spec;
}

OptimizerStates::OptimizerStates(const BlockConfig& cfg, double learning_rate)
    : w_hidden(cfg.hidden_size, cfg.input_width(), learning_rate),
      b_hidden(1, cfg.hidden_size, learning_rate),
      w_numbers(cfg.use_number_output ? kNumberUnits : 0,
                cfg.use_number_output ? cfg.hidden_size : 0, learning_rate),
      b_numbers(cfg.use_number_output ? 1 : 0, cfg.use_number_output ? kNumberUnits : 0,
                learning_rate),
      w_gestures(cfg.use_gesture_output ? kGestureUnits : 0,
                 cfg.use_gesture_output ? cfg.hidden_size : 0, learning_rate),
      b_gestures(cfg.use_gesture_output ? 1 : 0, cfg.use_gesture_output ? kGestureUnits : 0,
                 learning_rate) {}

SubEpochLoss train_sub_epoch(NetworkState& net, const ConditionSpec& cond,
                             const SubEpochSet& set, FeedbackMode mode, OptimizerStates& opt) {
    check_condition_matches(cond, net);
    if (set.pairs.empty()) {
        throw std::invalid_argument("train_sub_epoch: empty sub-epoch set");
    }
    Gradients sum = zero_gradients(net.cfg);
    SubEpochLoss loss;
    for (const SequencePair& pair : set.pairs) {
        for (const WiredSequence& seq : wire_condition(cond, pair)) {
            const Gradients g = bptt_gradients(net, seq.inputs, seq.targets, mode);
            add_into(sum.w_hidden, g.w_hidden);
            add_into(sum.b_hidden, g.b_hidden);
            if (net.cfg.use_number_output) {
                add_into(sum.w_numbers, g.w_numbers);
                add_into(sum.b_numbers, g.b_numbers);
            }
            if (net.cfg.use_gesture_output) {
                add_into(sum.w_gestures, g.w_gestures);
                add_into(sum.b_gestures, g.b_gestures);
            }
            loss.numbers += g.number_loss;
            loss.gestures += g.gesture_loss;
        }
    }
    loss.total = loss.numbers + loss.gestures;

    adam_step(net.w_hidden, sum.w_hidden, opt.w_hidden);
    adam_step(net.b_hidden, sum.b_hidden, opt.b_hidden);
    if (net.cfg.use_number_output) {
        adam_step(net.w_numbers, sum.w_numbers, opt.w_numbers);
        adam_step(net.b_numbers, sum.b_numbers, opt.b_numbers);
    }
    if (net.cfg.use_gesture_output) {
        adam_step(net.w_gestures, sum.w_gestures, opt.w_gestures);
        adam_step(net.b_gestures, sum.b_gestures, opt.b_gestures);
    }
    return loss;
}

TrainResult train_network(NetworkState net, const ConditionSpec& cond, double learning_rate,
                          std::size_t sub_epochs, FeedbackMode mode, const GestureTable& table,
                          Rng& rng) {
    check_condition_matches(cond, net);
    OptimizerStates opt(net.cfg, learning_rate);
    TrainResult result;
    result.trace.total_loss.reserve(sub_epochs);
    result.trace.number_loss.reserve(sub_epochs);
    result.trace.gesture_loss.reserve(sub_epochs);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t s = 0; s < sub_epochs; ++s) {
        const SubEpochSet set = gen_sub_epoch(cond.convention, table, rng);
        const SubEpochLoss loss = train_sub_epoch(net, cond, set, mode, opt);
        result.trace.total_loss.push_back(loss.total);
        result.trace.number_loss.push_back(loss.numbers);
        result.trace.gesture_loss.push_back(loss.gestures);
    }
    result.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.net = std::move(net);
    return result;
}

TrainResult train_condition(const ConditionSpec& cond, std::size_t hidden_size,
                            double learning_rate, std::size_t sub_epochs, FeedbackMode mode,
                            const GestureTable& table, Rng& rng) {
    NetworkState net = init_network(cond.block_config(hidden_size), rng);
    return train_network(std::move(net), cond, learning_rate, sub_epochs, mode, table, rng);
}

SequencePair recitation_pair() {
    SequencePair pair;
    pair.scene.n_objects = kMaxObjects;
    for (std::size_t p = 0; p < kMaxObjects; ++p) {
        pair.scene.occupancy[p] = true;
        pair.scene.object_positions.push_back(p);
    }
    auto make_sequence = [](bool trigger_on) {
        SequenceData seq;
        seq.trigger.assign(kSequenceSteps, trigger_on ? 1.0 : 0.0);
        seq.visual = Matrix(kSequenceSteps, kVisualUnits);
        seq.numbers = Matrix(kSequenceSteps, kNumberUnits);
        seq.gestures = Matrix(kSequenceSteps, kGestureUnits);
        return seq;
    };
    pair.off_sequence = make_sequence(false);
    pair.on_sequence = make_sequence(true);
    for (std::size_t t = 0; t < kMaxObjects; ++t) {
        pair.on_sequence.numbers(t, t) = 1.0;
    }
    return pair;
}

TrainResult train_stage1a(const TrainSpec& spec, Rng& rng) {
    const ConditionSpec cond = ConditionSpec::recitation();
    NetworkState net = init_network(cond.block_config(spec.stage1a_hidden), rng);
    OptimizerStates opt(net.cfg, spec.stage1a_learning_rate);
    SubEpochSet set;
    set.pairs.push_back(recitation_pair());

    TrainResult result;
    result.trace.total_loss.reserve(spec.stage1a_epochs);
    result.trace.number_loss.reserve(spec.stage1a_epochs);
    result.trace.gesture_loss.reserve(spec.stage1a_epochs);
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t epoch = 0; epoch < spec.stage1a_epochs; ++epoch) {
        const SubEpochLoss loss = train_sub_epoch(net, cond, set, spec.feedback_mode, opt);
        result.trace.total_loss.push_back(loss.total);
        result.trace.number_loss.push_back(loss.numbers);
        result.trace.gesture_loss.push_back(loss.gestures);
    }
    result.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.net = std::move(net);
    return result;
}

bool recitation_correct(const NetworkState& net) {
    const ConditionSpec cond = ConditionSpec::recitation();
    const SequencePair pair = recitation_pair();
    const auto wired = wire_condition(cond, pair);
    const std::vector<int> off_words =
        decode_numbers(forward_sequence(net, wired[0].inputs).numbers);
    const std::vector<int> on_words =
        decode_numbers(forward_sequence(net, wired[1].inputs).numbers);
    for (int word : off_words) {
        if (word != kSilence) return false;
    }
    for (std::size_t t = 0; t < kSequenceSteps; ++t) {
        const int expected = t < kMaxObjects ? static_cast<int>(t) + 1 : kSilence;
        if (on_words[t] != expected) return false;
    }
    return true;
}

TrainResult train_stage1b(const TrainSpec& spec, const GestureTable& table, Rng& rng) {
    const ConditionSpec cond = ConditionSpec::study1(2, spec.condition.convention);
    return train_condition(cond, spec.stage1b_hidden, spec.stage1b_learning_rate,
                           spec.stage1b_sub_epochs, spec.feedback_mode, table, rng);
}

TrainResult train_stage2(const TrainSpec& spec, const NetworkState* pre_a,
                         const NetworkState* pre_b, const GestureTable& table, Rng& rng) {
    const BlockConfig cfg = spec.condition.block_config(spec.hidden_size);
    NetworkState net = stitch_pretrained(pre_a, pre_b, cfg, rng);
    return train_network(std::move(net), spec.condition, spec.learning_rate, spec.sub_epochs,
                         spec.feedback_mode, table, rng);
}

RepetitionResult run_repetition(const TrainSpec& spec, const GestureTable& table,
                                std::size_t repetition) {
    RepetitionResult rep;
    rep.repetition = repetition;
    rep.seed = spec.base_seed + repetition;
    const Rng root(rep.seed);

    TrainResult main;
    std::optional<TrainResult> stage1b;
    if (spec.staged) {
        std::optional<TrainResult> stage1a;
        if (spec.pretraining == Pretraining::stage1a || spec.pretraining == Pretraining::both) {
            Rng rng = root.derive(kStreamStage1a);
            stage1a = train_stage1a(spec, rng);
        }
        if (spec.pretraining == Pretraining::stage1b || spec.pretraining == Pretraining::both) {
            Rng rng = root.derive(kStreamStage1b);
            stage1b = train_stage1b(spec, table, rng);
        }
        Rng rng = root.derive(kStreamMain);
        main = train_stage2(spec, stage1a ? &stage1a->net : nullptr,
                            stage1b ? &stage1b->net : nullptr, table, rng);
    } else {
        Rng rng = root.derive(kStreamMain);
        main = train_condition(spec.condition, spec.hidden_size, spec.learning_rate,
                               spec.sub_epochs, spec.feedback_mode, table, rng);
    }

    Rng test_rng = root.derive(kStreamTest);
    std::vector<SubEpochSet> test_sets;
    test_sets.reserve(spec.test_sets);
    for (std::size_t i = 0; i < spec.test_sets; ++i) {
        test_sets.push_back(gen_sub_epoch(spec.condition.convention, table, test_rng));
    }
    rep.accuracy = evaluate_network(main.net, spec.condition, test_sets, table);
    if (stage1b) {
        const ConditionSpec cond2 = ConditionSpec::study1(2, spec.condition.convention);
        rep.stage1b_gesture_accuracy =
            evaluate_network(stage1b->net, cond2, test_sets, table).gesture_accuracy;
    }
    rep.trace = std::move(main.trace);
    rep.net = std::move(main.net);
    return rep;
}

RunReport run_experiment(const TrainSpec& spec, const GestureTable& table) {
    if (spec.repetitions == 0) {
        throw std::invalid_argument("run_experiment: at least one repetition required");
    }
    if (spec.test_sets == 0) {
        throw std::invalid_argument("run_experiment: at least one test set required");
    }
    RunReport report;
    report.spec = spec;
    report.repetitions.resize(spec.repetitions);

    const std::size_t workers =
        std::min(std::max<std::size_t>(spec.threads, 1), spec.repetitions);
    if (workers == 1) {
        for (std::size_t r = 0; r < spec.repetitions; ++r) {
            report.repetitions[r] = run_repetition(spec, table, r);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    while (true) {
                        const std::size_t r = next.fetch_add(1);
                        if (r >= spec.repetitions) break;
                        report.repetitions[r] = run_repetition(spec, table, r);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    }

    report.has_counting = report.repetitions.front().accuracy.has_counting;
    report.has_gesture = report.repetitions.front().accuracy.has_gesture;
    std::vector<double> counting_values, gesture_values;
    counting_values.reserve(spec.repetitions);
    gesture_values.reserve(spec.repetitions);
    for (const RepetitionResult& rep : report.repetitions) {
        counting_values.push_back(rep.accuracy.counting_accuracy);
        gesture_values.push_back(rep.accuracy.gesture_accuracy);
    }
    if (report.has_counting) report.counting = aggregate(counting_values);
    if (report.has_gesture) report.gesture = aggregate(gesture_values);
    return report;
}

} // namespace countgest
