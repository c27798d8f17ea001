#include "countgest/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace countgest {

namespace {

constexpr double kSilenceThreshold = 0.5;

// Continued-fraction evaluation of the incomplete beta function (modified
// Lentz method).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 300;
    constexpr double kEps = 3e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) {
        throw std::invalid_argument("regularized_incomplete_beta: a and b must be positive");
    }
    if (x < 0.0 || x > 1.0) {
        throw std::invalid_argument("regularized_incomplete_beta: x must lie in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    // x^a (1-x)^b / (a B(a,b) ...) prefactor, shared by both branches
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

std::vector<int> decode_numbers(const Matrix& number_outputs) {
    if (number_outputs.cols() != kNumberUnits) {
        throw std::invalid_argument("decode_numbers: expected 10 columns");
    }
    std::vector<int> words(number_outputs.rows(), kSilence);
    for (std::size_t t = 0; t < number_outputs.rows(); ++t) {
        const double* y = number_outputs.row(t);
        std::size_t best = 0;
        for (std::size_t k = 1; k < kNumberUnits; ++k) {
            if (y[k] > y[best]) best = k;
        }
        if (y[best] >= kSilenceThreshold) words[t] = static_cast<int>(best) + 1;
    }
    return words;
}

std::vector<int> decode_gestures(const Matrix& gesture_outputs, const GestureTable& table,
                                 GestureConvention convention) {
    if (gesture_outputs.cols() != kGestureUnits) {
        throw std::invalid_argument("decode_gestures: expected 3 columns");
    }
    const std::array<double, kGestureUnits> zero_rest{};
    const double* rest = convention == GestureConvention::stay_at_last ? zero_rest.data()
                                                                       : table.base();
    std::vector<int> pointed(gesture_outputs.rows(), kRestLabel);
    for (std::size_t t = 0; t < gesture_outputs.rows(); ++t) {
        const double* y = gesture_outputs.row(t);
        int label = -1;
        double best = std::numeric_limits<double>::infinity();
        auto consider = [&](const double* v, int candidate) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < kGestureUnits; ++c) {
                const double d = y[c] - v[c];
                d2 += d * d;
            }
            if (d2 < best) {
                best = d2;
                label = candidate;
            }
        };
        for (std::size_t e = 0; e < kGestureEntries; ++e) {
            consider(table.entry(e), static_cast<int>(e));
        }
        consider(rest, kRestLabel);
        pointed[t] = label;
    }
    return pointed;
}

std::vector<int> expected_words(const SequencePair& pair) {
    std::vector<int> words(kSequenceSteps, kSilence);
    for (std::size_t t = 0; t < pair.scene.n_objects; ++t) {
        words[t] = static_cast<int>(t) + 1;
    }
    return words;
}

std::vector<int> expected_pointed(const SequencePair& pair) {
    const std::size_t n = pair.scene.n_objects;
    std::vector<int> pointed(kSequenceSteps, kRestLabel);
    for (std::size_t t = 0; t < kSequenceSteps; ++t) {
        if (t < n) {
            pointed[t] = static_cast<int>(pair.scene.object_positions[t]);
        } else if (pair.convention == GestureConvention::go_to_base) {
            pointed[t] = kBaseLabel;
        } else if (n > 0) {
            pointed[t] = static_cast<int>(pair.scene.object_positions[n - 1]);
        }
    }
    return pointed;
}

PairScore score_pair(const DecodedSequence& decoded, const SequencePair& pair) {
    PairScore score;
    if (!decoded.words.empty()) {
        if (decoded.words.size() != kSequenceSteps) {
            throw std::invalid_argument("score_pair: expected a 12-step word sequence");
        }
        score.counting_correct = decoded.words == expected_words(pair);
    }
    if (!decoded.pointed.empty()) {
        if (decoded.pointed.size() != kSequenceSteps) {
            throw std::invalid_argument("score_pair: expected a 12-step gesture sequence");
        }
        const std::vector<int> expected = expected_pointed(pair);
        const std::size_t evaluated = pair.scene.n_objects + 1;
        std::size_t correct = 0;
        for (std::size_t t = 0; t < evaluated; ++t) {
            if (decoded.pointed[t] == expected[t]) ++correct;
        }
        score.gesture_score = static_cast<double>(correct) / static_cast<double>(evaluated);
    }
    return score;
}

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) {
        throw std::invalid_argument("one_way_anova: at least two groups required");
    }
    std::size_t total_n = 0;
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) {
            throw std::invalid_argument("one_way_anova: empty group");
        }
        total_n += g.size();
        for (double v : g) grand_sum += v;
    }
    if (total_n <= groups.size()) {
        throw std::invalid_argument("one_way_anova: within-group degrees of freedom must be >= 1");
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const auto& g : groups) {
        double mean = 0.0;
        for (double v : g) mean += v;
        mean /= static_cast<double>(g.size());
        ss_between += static_cast<double>(g.size()) * (mean - grand_mean) * (mean - grand_mean);
        for (double v : g) ss_within += (v - mean) * (v - mean);
    }

    AnovaResult result;
    result.df_between = groups.size() - 1;
    result.df_within = total_n - groups.size();
    const double ms_between = ss_between / static_cast<double>(result.df_between);
    const double ms_within = ss_within / static_cast<double>(result.df_within);
    if (ms_within == 0.0) {
        if (ms_between == 0.0) {
            result.f = 0.0;
            result.p = 1.0;
        } else {
            result.f = std::numeric_limits<double>::infinity();
            result.p = 0.0;
        }
        return result;
    }
    result.f = ms_between / ms_within;
    const double d1 = static_cast<double>(result.df_between);
    const double d2 = static_cast<double>(result.df_within);
    result.p = regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * result.f));
    return result;
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) {
        throw std::invalid_argument("aggregate: no values");
    }
    Aggregate agg;
    for (double v : values) agg.mean += v;
    agg.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
        agg.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return agg;
}

AccuracyReport evaluate_network(const NetworkState& net, const ConditionSpec& spec,
                                const std::vector<SubEpochSet>& test_sets,
                                const GestureTable& table, FeedbackMode mode) {
    if (test_sets.empty()) {
        throw std::invalid_argument("evaluate_network: no test sets");
    }
    AccuracyReport report;
    report.has_counting = spec.number_output;
    report.has_gesture = spec.gesture_output;

    std::array<double, kNumerosities> counting_sum{};
    std::array<double, kNumerosities> gesture_sum{};
    std::array<std::size_t, kNumerosities> counts{};

    for (const SubEpochSet& set : test_sets) {
        for (const SequencePair& pair : set.pairs) {
            const WiredSequence wired = wire_sequence(spec, pair, pair.on_sequence);
            const Matrix* forced =
                spec.gesture_output ? &wired.targets.gestures : nullptr;
            const ForwardTrace trace = forward_sequence(net, wired.inputs, mode, forced);
            DecodedSequence decoded;
            if (spec.number_output) decoded.words = decode_numbers(trace.numbers);
            if (spec.gesture_output) {
                decoded.pointed = decode_gestures(trace.gestures, table, pair.convention);
            }
            const PairScore score = score_pair(decoded, pair);
            const std::size_t n = pair.scene.n_objects;
            counting_sum[n] += score.counting_correct ? 1.0 : 0.0;
            gesture_sum[n] += score.gesture_score;
            counts[n] += 1;
        }
    }

    double counting_total = 0.0;
    double gesture_total = 0.0;
    for (std::size_t n = 0; n < kNumerosities; ++n) {
        if (counts[n] == 0) continue;
        report.counting_by_numerosity[n] = counting_sum[n] / static_cast<double>(counts[n]);
        report.gesture_by_numerosity[n] = gesture_sum[n] / static_cast<double>(counts[n]);
        if (n >= 1) {
            counting_total += report.counting_by_numerosity[n];
            gesture_total += report.gesture_by_numerosity[n];
        }
    }
    report.counting_accuracy = counting_total / static_cast<double>(kMaxObjects);
    report.gesture_accuracy = gesture_total / static_cast<double>(kMaxObjects);
    return report;
}

} // namespace countgest
