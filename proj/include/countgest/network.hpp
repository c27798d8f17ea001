#pragma once

#include "countgest/matrix.hpp"
#include "countgest/rng.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace countgest {

inline constexpr std::size_t kTriggerUnits = 1;
inline constexpr std::size_t kVisualUnits = 20;
inline constexpr std::size_t kGestureUnits = 3;
inline constexpr std::size_t kNumberUnits = 10;

/// Which input/output blocks are wired into the network. The trigger input
/// (1 unit) and the Elman context block are always present; everything else
/// is optional. With use_jordan_loop the gesture input block exists but is
/// fed from the network's own gesture output of the previous step instead of
/// an external signal.
struct BlockConfig {
    bool use_visual_input = false;
    bool use_gesture_input = false;
    bool use_number_output = false;
    bool use_gesture_output = false;
    bool use_jordan_loop = false;
    std::size_t hidden_size = 0;

    bool gesture_in_block() const { return use_gesture_input || use_jordan_loop; }

    // input vector layout: [trigger | visual | gesture_in | context]
    std::size_t trigger_offset() const { return 0; }
    std::size_t visual_offset() const { return kTriggerUnits; }
    std::size_t gesture_offset() const {
        return kTriggerUnits + (use_visual_input ? kVisualUnits : 0);
    }
    std::size_t context_offset() const {
        return gesture_offset() + (gesture_in_block() ? kGestureUnits : 0);
    }
    std::size_t input_width() const { return context_offset() + hidden_size; }

    /// Throws std::invalid_argument on an inconsistent wiring.
    void validate() const;

    friend bool operator==(const BlockConfig&, const BlockConfig&) = default;
};

/// All weights and biases for one wiring. Matrices for disabled output
/// blocks stay empty. Hidden and number outputs are sigmoid, gesture
/// outputs are linear.
struct NetworkState {
    BlockConfig cfg;
    Matrix w_hidden;   // hidden_size x input_width
    Matrix b_hidden;   // 1 x hidden_size
    Matrix w_numbers;  // kNumberUnits x hidden_size
    Matrix b_numbers;  // 1 x kNumberUnits
    Matrix w_gestures; // kGestureUnits x hidden_size
    Matrix b_gestures; // 1 x kGestureUnits
};

enum class FeedbackMode { free_running, teacher_forced };

/// Externally supplied signals for one sequence. `visual` is T x 20 when the
/// visual block is wired, `gesture_in` is T x 3 when the gesture block takes
/// an external signal. Under the Jordan loop `jordan_initial` supplies the
/// gesture input of step 0 (zeros or the base posture, per the convention).
struct SequenceInputs {
    std::vector<double> trigger;
    Matrix visual;
    Matrix gesture_in;
    std::array<double, kGestureUnits> jordan_initial{};

    std::size_t steps() const { return trigger.size(); }
};

/// Targets for the enabled output blocks, T x 10 and T x 3.
struct SequenceTargets {
    Matrix numbers;
    Matrix gestures;
};

/// Every intermediate of a forward pass. `inputs` holds the assembled input
/// vectors (including the context copy and any Jordan-fed gesture values),
/// which is exactly what backpropagation needs.
struct ForwardTrace {
    Matrix inputs;   // T x input_width
    Matrix hidden;   // T x hidden_size
    Matrix numbers;  // T x kNumberUnits
    Matrix gestures; // T x kGestureUnits
};

struct Gradients {
    Matrix w_hidden;
    Matrix b_hidden;
    Matrix w_numbers;
    Matrix b_numbers;
    Matrix w_gestures;
    Matrix b_gestures;
    double loss = 0.0;
    double number_loss = 0.0;
    double gesture_loss = 0.0;
};

/// Runs the network over one sequence. Context starts at zero. With the
/// Jordan loop, gesture input at step t comes from the network's own output
/// at t-1 (free_running) or from gesture_targets row t-1 (teacher_forced).
/// `gesture_targets` is only consulted in the latter case.
ForwardTrace forward_sequence(const NetworkState& net, const SequenceInputs& in,
                              FeedbackMode mode = FeedbackMode::free_running,
                              const Matrix* gesture_targets = nullptr);

/// Exact gradients of the summed squared error over all enabled outputs and
/// steps, by backpropagation through time over the full sequence. Gradients
/// flow through the Elman context always, and through the Jordan loop in
/// free_running mode.
Gradients bptt_gradients(const NetworkState& net, const SequenceInputs& in,
                         const SequenceTargets& targets, FeedbackMode mode);

/// Glorot-uniform weights, zero biases. Matrices are drawn in a fixed order
/// (hidden, numbers, gestures) so a seed fully determines the state.
NetworkState init_network(const BlockConfig& cfg, Rng& rng);

/// Builds a stage-2 network whose hidden layer is the concatenation
/// [H_A | H_B] of the pre-trained stage networks. Copied blocks: trigger and
/// context weights plus hidden biases of each partition from its source net,
/// hidden-to-numbers from stage 1A, visual-to-H_B and hidden-to-gestures
/// from stage 1B. Everything else (cross-partition context, visual-to-H_A,
/// gesture input columns, output columns of the foreign partition) is fresh
/// Glorot. Either source may be null: its partition is then entirely fresh
/// with zero biases.
NetworkState stitch_pretrained(const NetworkState* stage1a, const NetworkState* stage1b,
                               const BlockConfig& cfg_stage2, Rng& rng);

} // namespace countgest
