#pragma once

#include "countgest/datagen.hpp"
#include "countgest/gesture.hpp"
#include "countgest/matrix.hpp"
#include "countgest/network.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace countgest {

// decoded word values: kSilence or 1..10
inline constexpr int kSilence = 0;
// decoded gesture labels: 0..19 are positions, then base and rest
inline constexpr int kBaseLabel = 20;
inline constexpr int kRestLabel = 21;

/// Per step: kSilence if no unit reaches 0.5, otherwise the argmax unit's
/// word (ties to the lowest index).
std::vector<int> decode_numbers(const Matrix& number_outputs);

/// Per step: the label of the nearest vector among the 21 table entries
/// plus the convention's rest vector (the zero vector under stay_at_last;
/// under go_to_base the rest coincides with the base entry and ties resolve
/// to the base label).
std::vector<int> decode_gestures(const Matrix& gesture_outputs, const GestureTable& table,
                                 GestureConvention convention);

struct DecodedSequence {
    std::vector<int> words;
    std::vector<int> pointed;
};

struct PairScore {
    bool counting_correct = false;
    double gesture_score = 0.0;
};

/// Word and gesture labels the decoders should produce for a pair's
/// trigger-on sequence.
std::vector<int> expected_words(const SequencePair& pair);
std::vector<int> expected_pointed(const SequencePair& pair);

/// Scores a decoded trigger-on sequence. Counting is all-or-nothing over
/// all 12 steps; the gesture score is the fraction of correct labels among
/// the first n+1 steps. Streams left empty in `decoded` score as zero.
PairScore score_pair(const DecodedSequence& decoded, const SequencePair& pair);

struct AnovaResult {
    double f = 0.0;
    std::size_t df_between = 0;
    std::size_t df_within = 0;
    double p = 1.0;
};

/// Standard one-way fixed-effects ANOVA. Requires at least two groups and
/// df_within >= 1. With zero within-group variance: F = 0, p = 1 when the
/// group means also coincide, otherwise F = +infinity, p = 0.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

/// I_x(a, b), used for the F-distribution tail probability.
double regularized_incomplete_beta(double a, double b, double x);

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation (n - 1)
};

Aggregate aggregate(const std::vector<double>& values);

/// Accuracy of one network over a collection of test sets. Headline
/// accuracies average numerosities 1..10; the breakdown also keeps 0.
struct AccuracyReport {
    bool has_counting = false;
    bool has_gesture = false;
    double counting_accuracy = 0.0;
    double gesture_accuracy = 0.0;
    std::array<double, kNumerosities> counting_by_numerosity{};
    std::array<double, kNumerosities> gesture_by_numerosity{};
};

AccuracyReport evaluate_network(const NetworkState& net, const ConditionSpec& spec,
                                const std::vector<SubEpochSet>& test_sets,
                                const GestureTable& table,
                                FeedbackMode mode = FeedbackMode::free_running);

} // namespace countgest
