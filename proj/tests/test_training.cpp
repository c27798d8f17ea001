#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "countgest/datagen.hpp"
#include "countgest/evaluation.hpp"
#include "countgest/gesture.hpp"
#include "countgest/network.hpp"
#include "countgest/optim.hpp"
#include "countgest/training.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace countgest;

namespace {

const GestureTable& table() {
    static const GestureTable t = build_gesture_table(ArmModel{});
    return t;
}

void accumulate(Matrix& into, const Matrix& grad) {
    if (into.empty()) {
        into = grad;
        return;
    }
    for (std::size_t i = 0; i < into.size(); ++i) into.data()[i] += grad.data()[i];
}

} // namespace

TEST_CASE("a sub-epoch step is one Adam update on the summed gradients") {
    const ConditionSpec cond = ConditionSpec::study1(3);
    Rng rng(601);
    NetworkState net = init_network(cond.block_config(10), rng);
    NetworkState reference = net;

    Rng data_rng(602);
    const SubEpochSet set = gen_sub_epoch(cond.convention, table(), data_rng);

    // by hand: sum the per-sequence gradients, then step each parameter once
    Gradients total;
    double expected_numbers = 0.0;
    double expected_gestures = 0.0;
    for (const SequencePair& pair : set.pairs) {
        for (const WiredSequence& wired : wire_condition(cond, pair)) {
            const Gradients g = bptt_gradients(reference, wired.inputs, wired.targets,
                                               FeedbackMode::free_running);
            accumulate(total.w_hidden, g.w_hidden);
            accumulate(total.b_hidden, g.b_hidden);
            accumulate(total.w_numbers, g.w_numbers);
            accumulate(total.b_numbers, g.b_numbers);
            accumulate(total.w_gestures, g.w_gestures);
            accumulate(total.b_gestures, g.b_gestures);
            expected_numbers += g.number_loss;
            expected_gestures += g.gesture_loss;
        }
    }
    OptimizerStates manual_opt(reference.cfg, 0.01);
    adam_step(reference.w_hidden, total.w_hidden, manual_opt.w_hidden);
    adam_step(reference.b_hidden, total.b_hidden, manual_opt.b_hidden);
    adam_step(reference.w_numbers, total.w_numbers, manual_opt.w_numbers);
    adam_step(reference.b_numbers, total.b_numbers, manual_opt.b_numbers);
    adam_step(reference.w_gestures, total.w_gestures, manual_opt.w_gestures);
    adam_step(reference.b_gestures, total.b_gestures, manual_opt.b_gestures);

    OptimizerStates opt(net.cfg, 0.01);
    const SubEpochLoss loss = train_sub_epoch(net, cond, set, FeedbackMode::free_running, opt);

    CHECK(net.w_hidden == reference.w_hidden);
    CHECK(net.b_hidden == reference.b_hidden);
    CHECK(net.w_numbers == reference.w_numbers);
    CHECK(net.b_numbers == reference.b_numbers);
    CHECK(net.w_gestures == reference.w_gestures);
    CHECK(net.b_gestures == reference.b_gestures);
    CHECK(loss.numbers == doctest::Approx(expected_numbers).epsilon(1e-12));
    CHECK(loss.gestures == doctest::Approx(expected_gestures).epsilon(1e-12));
    CHECK(loss.total == doctest::Approx(expected_numbers + expected_gestures).epsilon(1e-12));
}

TEST_CASE("training is reproducible from the seed") {
    const ConditionSpec cond = ConditionSpec::study1(5);
    Rng rng_a(611);
    Rng rng_b(611);
    const TrainResult a = train_condition(cond, 8, 0.01, 40, FeedbackMode::free_running, table(),
                                          rng_a);
    const TrainResult b = train_condition(cond, 8, 0.01, 40, FeedbackMode::free_running, table(),
                                          rng_b);
    CHECK(a.net.w_hidden == b.net.w_hidden);
    CHECK(a.net.w_numbers == b.net.w_numbers);
    CHECK(a.trace.total_loss == b.trace.total_loss);

    Rng rng_c(612);
    const TrainResult c = train_condition(cond, 8, 0.01, 40, FeedbackMode::free_running, table(),
                                          rng_c);
    CHECK_FALSE(a.net.w_hidden == c.net.w_hidden);
}

TEST_CASE("the loss trace has one entry per sub-epoch and decreases") {
    const ConditionSpec cond = ConditionSpec::study1(1);
    Rng rng(613);
    const TrainResult result =
        train_condition(cond, 16, 0.005, 300, FeedbackMode::free_running, table(), rng);
    REQUIRE(result.trace.total_loss.size() == 300);
    REQUIRE(result.trace.number_loss.size() == 300);
    REQUIRE(result.trace.gesture_loss.size() == 300);

    // gesture loss stays zero without a gesture output
    for (double g : result.trace.gesture_loss) CHECK(g == 0.0);
    CHECK(result.trace.total_loss.back() < 0.2 * result.trace.total_loss.front());
}

TEST_CASE("the recitation pair is the fixed counting rhyme") {
    const SequencePair pair = recitation_pair();
    CHECK(pair.scene.n_objects == kMaxObjects);
    for (std::size_t t = 0; t < kSequenceSteps; ++t) {
        CHECK(pair.off_sequence.trigger[t] == 0.0);
        CHECK(pair.on_sequence.trigger[t] == 1.0);
        for (std::size_t c = 0; c < kNumberUnits; ++c) {
            CHECK(pair.off_sequence.numbers(t, c) == 0.0);
            const double want = (t < kMaxObjects && c == t) ? 1.0 : 0.0;
            CHECK(pair.on_sequence.numbers(t, c) == want);
        }
    }

    const std::vector<int> words = expected_words(pair);
    for (std::size_t t = 0; t < kMaxObjects; ++t) CHECK(words[t] == static_cast<int>(t) + 1);
    CHECK(words[10] == kSilence);
    CHECK(words[11] == kSilence);
}

TEST_CASE("stage 1a learns to recite") {
    TrainSpec spec = TrainSpec::study2(Pretraining::stage1a, GestureConvention::stay_at_last,
                                       false);
    spec.stage1a_epochs = 3000;
    Rng rng(615);
    const TrainResult result = train_stage1a(spec, rng);
    CHECK(recitation_correct(result.net));
    CHECK(result.net.cfg.hidden_size == spec.stage1a_hidden);
    CHECK_FALSE(result.net.cfg.use_visual_input);
}

TEST_CASE("an untrained network does not recite") {
    Rng rng(617);
    const NetworkState net = init_network(ConditionSpec::recitation().block_config(20), rng);
    CHECK_FALSE(recitation_correct(net));
}

TEST_CASE("run_repetition is deterministic and independent of other stages") {
    TrainSpec spec = TrainSpec::study1(6);
    spec.hidden_size = 8;
    spec.sub_epochs = 30;
    spec.test_sets = 2;
    spec.base_seed = 90;

    const RepetitionResult a = run_repetition(spec, table(), 3);
    const RepetitionResult b = run_repetition(spec, table(), 3);
    CHECK(a.seed == 93);
    CHECK(a.net.w_hidden == b.net.w_hidden);
    CHECK(a.accuracy.counting_accuracy == b.accuracy.counting_accuracy);
    CHECK(a.accuracy.gesture_accuracy == b.accuracy.gesture_accuracy);
    CHECK(a.stage1b_gesture_accuracy == -1.0);

    const RepetitionResult other = run_repetition(spec, table(), 4);
    CHECK(other.seed == 94);
    CHECK_FALSE(a.net.w_hidden == other.net.w_hidden);
}

TEST_CASE("parallel and serial experiments produce identical reports") {
    TrainSpec spec = TrainSpec::study1(8);
    spec.hidden_size = 8;
    spec.sub_epochs = 25;
    spec.repetitions = 5;
    spec.test_sets = 2;
    spec.base_seed = 7;

    spec.threads = 1;
    const RunReport serial = run_experiment(spec, table());
    spec.threads = 4;
    const RunReport parallel = run_experiment(spec, table());

    REQUIRE(serial.repetitions.size() == 5);
    REQUIRE(parallel.repetitions.size() == 5);
    for (std::size_t r = 0; r < 5; ++r) {
        CHECK(serial.repetitions[r].seed == parallel.repetitions[r].seed);
        CHECK(serial.repetitions[r].accuracy.counting_accuracy ==
              parallel.repetitions[r].accuracy.counting_accuracy);
        CHECK(serial.repetitions[r].accuracy.gesture_accuracy ==
              parallel.repetitions[r].accuracy.gesture_accuracy);
        CHECK(serial.repetitions[r].net.w_hidden == parallel.repetitions[r].net.w_hidden);
        CHECK(serial.repetitions[r].trace.total_loss == parallel.repetitions[r].trace.total_loss);
    }
    CHECK(serial.counting.mean == parallel.counting.mean);
    CHECK(serial.counting.sd == parallel.counting.sd);
    CHECK(serial.gesture.mean == parallel.gesture.mean);
    CHECK(serial.gesture.sd == parallel.gesture.sd);
}

TEST_CASE("the aggregate summarizes the repetition accuracies") {
    TrainSpec spec = TrainSpec::study1(5);
    spec.hidden_size = 8;
    spec.sub_epochs = 20;
    spec.repetitions = 3;
    spec.test_sets = 2;

    const RunReport report = run_experiment(spec, table());
    CHECK(report.has_counting);
    CHECK_FALSE(report.has_gesture);

    std::vector<double> values;
    for (const RepetitionResult& rep : report.repetitions) {
        values.push_back(rep.accuracy.counting_accuracy);
    }
    const Aggregate expected = aggregate(values);
    CHECK(report.counting.mean == doctest::Approx(expected.mean).epsilon(1e-12));
    CHECK(report.counting.sd == doctest::Approx(expected.sd).epsilon(1e-12));
}

TEST_CASE("study 2 specs wire the stages") {
    const TrainSpec nl = TrainSpec::study2(Pretraining::both, GestureConvention::go_to_base,
                                           false);
    CHECK(nl.condition.condition_id == 3);
    CHECK(nl.staged);
    CHECK(nl.learning_rate == 0.001);
    CHECK(nl.condition.convention == GestureConvention::go_to_base);

    const TrainSpec looped = TrainSpec::study2(Pretraining::none, GestureConvention::stay_at_last,
                                               true);
    CHECK(looped.condition.condition_id == 4);
    CHECK(looped.condition.jordan_loop);
}

TEST_CASE("a staged repetition records the stage 1b gesture accuracy") {
    TrainSpec spec = TrainSpec::study2(Pretraining::stage1b, GestureConvention::stay_at_last,
                                       false);
    spec.hidden_size = 10;
    spec.stage1b_hidden = 6;
    spec.stage1b_sub_epochs = 25;
    spec.sub_epochs = 25;
    spec.test_sets = 2;

    const RepetitionResult rep = run_repetition(spec, table(), 0);
    CHECK(rep.stage1b_gesture_accuracy >= 0.0);
    CHECK(rep.stage1b_gesture_accuracy <= 1.0);
    CHECK(rep.net.cfg.hidden_size == 10);

    // without pre-training the field stays not-applicable
    TrainSpec plain = spec;
    plain.pretraining = Pretraining::none;
    const RepetitionResult none = run_repetition(plain, table(), 0);
    CHECK(none.stage1b_gesture_accuracy == -1.0);
}

TEST_CASE("stage pre-training changes the stage 2 starting point") {
    TrainSpec spec = TrainSpec::study2(Pretraining::both, GestureConvention::stay_at_last, false);
    spec.hidden_size = 10;
    spec.stage1a_hidden = 4;
    spec.stage1a_epochs = 30;
    spec.stage1b_hidden = 6;
    spec.stage1b_sub_epochs = 20;
    spec.sub_epochs = 10;
    spec.test_sets = 2;

    const RepetitionResult with = run_repetition(spec, table(), 1);

    TrainSpec fresh = spec;
    fresh.pretraining = Pretraining::none;
    const RepetitionResult without = run_repetition(fresh, table(), 1);

    CHECK_FALSE(with.net.w_hidden == without.net.w_hidden);
}

TEST_CASE("run_experiment validates its sizes") {
    TrainSpec spec = TrainSpec::study1(1);
    spec.repetitions = 0;
    CHECK_THROWS_AS(run_experiment(spec, table()), std::invalid_argument);

    spec.repetitions = 1;
    spec.test_sets = 0;
    CHECK_THROWS_AS(run_experiment(spec, table()), std::invalid_argument);
}
