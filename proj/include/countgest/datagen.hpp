#pragma once

#include "countgest/gesture.hpp"
#include "countgest/matrix.hpp"
#include "countgest/network.hpp"
#include "countgest/rng.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace countgest {

inline constexpr std::size_t kSequenceSteps = 12;
inline constexpr std::size_t kMaxObjects = 10;
inline constexpr std::size_t kNumerosities = 11; // 0..10
inline constexpr std::size_t kSubEpochSequences = 2 * kNumerosities;

enum class GestureConvention { stay_at_last, go_to_base };

/// A random arrangement of n objects over the 20 positions. The visual
/// input is the occupancy divided by the object count, so active entries
/// sum to exactly 1 (all zeros for an empty scene).
struct Scene {
    std::array<bool, kVisualUnits> occupancy{};
    std::size_t n_objects = 0;
    std::vector<std::size_t> object_positions; // ascending occupied indices

    std::array<double, kVisualUnits> visual() const;
};

Scene gen_scene(std::size_t n_objects, Rng& rng);

/// One 12-step sequence: trigger, per-step visual input, number targets and
/// the gesture stream (used as targets, as an external input, or both,
/// depending on the condition wiring).
struct SequenceData {
    std::vector<double> trigger;
    Matrix visual;   // kSequenceSteps x kVisualUnits
    Matrix numbers;  // kSequenceSteps x kNumberUnits
    Matrix gestures; // kSequenceSteps x kGestureUnits
};

/// The trigger-off / trigger-on pair for one scene. `rest_vector` is the
/// convention's resting gesture value: zeros under stay_at_last, the base
/// posture under go_to_base. It fills the off sequence's gesture stream,
/// the trailing steps under go_to_base, and the Jordan input at step 0.
struct SequencePair {
    Scene scene;
    GestureConvention convention = GestureConvention::stay_at_last;
    std::array<double, kGestureUnits> rest_vector{};
    SequenceData off_sequence;
    SequenceData on_sequence;
};

SequencePair build_sequence_pair(const Scene& scene, GestureConvention convention,
                                 const GestureTable& table);

/// 11 pairs, one per numerosity 0..10, in randomized order (22 sequences).
struct SubEpochSet {
    std::vector<SequencePair> pairs;
};

SubEpochSet gen_sub_epoch(GestureConvention convention, const GestureTable& table, Rng& rng);

/// Condition wiring: which streams feed the network and which are trained.
/// Ids 1..8 follow the Study-1 condition table; id 0 is the recitation
/// wiring (trigger only to numbers) used by the first pre-training stage.
struct ConditionSpec {
    int condition_id = 0;
    bool visual_input = false;
    bool gesture_input = false;
    bool number_output = false;
    bool gesture_output = false;
    bool jordan_loop = false;
    GestureConvention convention = GestureConvention::stay_at_last;

    BlockConfig block_config(std::size_t hidden_size) const;

    static ConditionSpec study1(int id, GestureConvention convention =
                                            GestureConvention::stay_at_last);
    static ConditionSpec recitation();
};

/// Network-ready view of one sequence under a condition.
struct WiredSequence {
    SequenceInputs inputs;
    SequenceTargets targets;
};

WiredSequence wire_sequence(const ConditionSpec& spec, const SequencePair& pair,
                            const SequenceData& seq);

/// Wires both sequences of a pair, off first.
std::array<WiredSequence, 2> wire_condition(const ConditionSpec& spec, const SequencePair& pair);

} // namespace countgest
