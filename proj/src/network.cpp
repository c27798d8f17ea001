#include "countgest/network.hpp"

#include "countgest/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace countgest {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw std::invalid_argument(std::string("network: ") + what +
                                    " shape does not match the block config");
    }
}

void check_network(const NetworkState& net) {
    const BlockConfig& cfg = net.cfg;
    cfg.validate();
    check_shape(net.w_hidden, cfg.hidden_size, cfg.input_width(), "hidden weights");
    check_shape(net.b_hidden, 1, cfg.hidden_size, "hidden bias");
    if (cfg.use_number_output) {
        check_shape(net.w_numbers, kNumberUnits, cfg.hidden_size, "number weights");
        check_shape(net.b_numbers, 1, kNumberUnits, "number bias");
    }
    if (cfg.use_gesture_output) {
        check_shape(net.w_gestures, kGestureUnits, cfg.hidden_size, "gesture weights");
        check_shape(net.b_gestures, 1, kGestureUnits, "gesture bias");
    }
}

void check_inputs(const BlockConfig& cfg, const SequenceInputs& in) {
    const std::size_t steps = in.steps();
    if (steps == 0) {
        throw std::invalid_argument("network: sequence must have at least one step");
    }
    if (cfg.use_visual_input) {
        check_shape(in.visual, steps, kVisualUnits, "visual input");
    }
    if (cfg.use_gesture_input) {
        check_shape(in.gesture_in, steps, kGestureUnits, "gesture input");
    }
}

} // namespace

void BlockConfig::validate() const {
    if (hidden_size == 0) {
        throw std::invalid_argument("BlockConfig: hidden_size must be at least 1");
    }
    if (!use_number_output && !use_gesture_output) {
        throw std::invalid_argument("BlockConfig: at least one output block must be enabled");
    }
    if (use_jordan_loop && !use_gesture_output) {
        throw std::invalid_argument("BlockConfig: the Jordan loop requires the gesture output");
    }
    if (use_jordan_loop && use_gesture_input) {
        throw std::invalid_argument(
            "BlockConfig: the Jordan loop supplies the gesture input internally; "
            "an external gesture input cannot be wired at the same time");
    }
}

ForwardTrace forward_sequence(const NetworkState& net, const SequenceInputs& in,
                              FeedbackMode mode, const Matrix* gesture_targets) {
    check_network(net);
    check_inputs(net.cfg, in);
    const BlockConfig& cfg = net.cfg;
    const std::size_t steps = in.steps();
    const std::size_t hidden = cfg.hidden_size;
    const std::size_t width = cfg.input_width();

    if (cfg.use_jordan_loop && mode == FeedbackMode::teacher_forced) {
        if (gesture_targets == nullptr || gesture_targets->rows() != steps ||
            gesture_targets->cols() != kGestureUnits) {
            throw std::invalid_argument(
                "forward_sequence: teacher forcing the Jordan loop requires gesture targets");
        }
    }

    ForwardTrace trace;
    trace.inputs = Matrix(steps, width);
    trace.hidden = Matrix(steps, hidden);
    if (cfg.use_number_output) trace.numbers = Matrix(steps, kNumberUnits);
    if (cfg.use_gesture_output) trace.gestures = Matrix(steps, kGestureUnits);

    for (std::size_t t = 0; t < steps; ++t) {
        double* x = trace.inputs.row(t);
        x[cfg.trigger_offset()] = in.trigger[t];
        if (cfg.use_visual_input) {
            const double* v = in.visual.row(t);
            std::copy(v, v + kVisualUnits, x + cfg.visual_offset());
        }
        if (cfg.gesture_in_block()) {
            double* gx = x + cfg.gesture_offset();
            if (cfg.use_gesture_input) {
                const double* g = in.gesture_in.row(t);
                std::copy(g, g + kGestureUnits, gx);
            } else if (t == 0) {
                std::copy(in.jordan_initial.begin(), in.jordan_initial.end(), gx);
            } else if (mode == FeedbackMode::free_running) {
                const double* g = trace.gestures.row(t - 1);
                std::copy(g, g + kGestureUnits, gx);
            } else {
                const double* g = gesture_targets->row(t - 1);
                std::copy(g, g + kGestureUnits, gx);
            }
        }
        if (t > 0) {
            const double* prev = trace.hidden.row(t - 1);
            std::copy(prev, prev + hidden, x + cfg.context_offset());
        }

        double* h = trace.hidden.row(t);
        for (std::size_t i = 0; i < hidden; ++i) {
            const double* w = net.w_hidden.row(i);
            double acc = net.b_hidden(0, i);
            for (std::size_t j = 0; j < width; ++j) acc += w[j] * x[j];
            h[i] = sigmoid(acc);
        }
        if (cfg.use_number_output) {
            double* y = trace.numbers.row(t);
            for (std::size_t k = 0; k < kNumberUnits; ++k) {
                const double* w = net.w_numbers.row(k);
                double acc = net.b_numbers(0, k);
                for (std::size_t i = 0; i < hidden; ++i) acc += w[i] * h[i];
                y[k] = sigmoid(acc);
            }
        }
        if (cfg.use_gesture_output) {
            double* y = trace.gestures.row(t);
            for (std::size_t k = 0; k < kGestureUnits; ++k) {
                const double* w = net.w_gestures.row(k);
                double acc = net.b_gestures(0, k);
                for (std::size_t i = 0; i < hidden; ++i) acc += w[i] * h[i];
                y[k] = acc;
            }
        }
    }
    return trace;
}

Gradients bptt_gradients(const NetworkState& net, const SequenceInputs& in,
                         const SequenceTargets& targets, FeedbackMode mode) {
    const BlockConfig& cfg = net.cfg;
    check_network(net);
    check_inputs(cfg, in);
    const std::size_t steps = in.steps();
    if (cfg.use_number_output &&
        (targets.numbers.rows() != steps || targets.numbers.cols() != kNumberUnits)) {
        throw std::invalid_argument("bptt_gradients: number targets missing or mis-shaped");
    }
    if (cfg.use_gesture_output &&
        (targets.gestures.rows() != steps || targets.gestures.cols() != kGestureUnits)) {
        throw std::invalid_argument("bptt_gradients: gesture targets missing or mis-shaped");
    }

    const Matrix* forced = cfg.use_gesture_output ? &targets.gestures : nullptr;
    const ForwardTrace trace = forward_sequence(net, in, mode, forced);

    const std::size_t hidden = cfg.hidden_size;
    const std::size_t width = cfg.input_width();
    Gradients grad;
    grad.w_hidden = Matrix(hidden, width);
    grad.b_hidden = Matrix(1, hidden);
    if (cfg.use_number_output) {
        grad.w_numbers = Matrix(kNumberUnits, hidden);
        grad.b_numbers = Matrix(1, kNumberUnits);
    }
    if (cfg.use_gesture_output) {
        grad.w_gestures = Matrix(kGestureUnits, hidden);
        grad.b_gestures = Matrix(1, kGestureUnits);
    }

    const bool jordan_feedback = cfg.use_jordan_loop && mode == FeedbackMode::free_running;
    std::vector<double> dh(hidden), dz(hidden);
    std::vector<double> context_feedback(hidden, 0.0);    // dL/dh_t arriving from step t+1
    std::array<double, kGestureUnits> gesture_feedback{}; // dL/dgesture_out_t from step t+1

    for (std::size_t t = steps; t-- > 0;) {
        std::copy(context_feedback.begin(), context_feedback.end(), dh.begin());
        const double* h = trace.hidden.row(t);

        if (cfg.use_number_output) {
            const double* y = trace.numbers.row(t);
            const double* target = targets.numbers.row(t);
            for (std::size_t k = 0; k < kNumberUnits; ++k) {
                const double diff = y[k] - target[k];
                grad.number_loss += diff * diff;
                const double da = 2.0 * diff * y[k] * (1.0 - y[k]);
                double* gw = grad.w_numbers.row(k);
                const double* w = net.w_numbers.row(k);
                for (std::size_t i = 0; i < hidden; ++i) {
                    gw[i] += da * h[i];
                    dh[i] += w[i] * da;
                }
                grad.b_numbers(0, k) += da;
            }
        }
        if (cfg.use_gesture_output) {
            const double* y = trace.gestures.row(t);
            const double* target = targets.gestures.row(t);
            for (std::size_t k = 0; k < kGestureUnits; ++k) {
                const double diff = y[k] - target[k];
                grad.gesture_loss += diff * diff;
                double dy = 2.0 * diff;
                if (jordan_feedback) dy += gesture_feedback[k];
                double* gw = grad.w_gestures.row(k);
                const double* w = net.w_gestures.row(k);
                for (std::size_t i = 0; i < hidden; ++i) {
                    gw[i] += dy * h[i];
                    dh[i] += w[i] * dy;
                }
                grad.b_gestures(0, k) += dy;
            }
        }

        const double* x = trace.inputs.row(t);
        for (std::size_t i = 0; i < hidden; ++i) {
            dz[i] = dh[i] * h[i] * (1.0 - h[i]);
            grad.b_hidden(0, i) += dz[i];
            double* gw = grad.w_hidden.row(i);
            for (std::size_t j = 0; j < width; ++j) gw[j] += dz[i] * x[j];
        }

        // feedback consumed by step t-1; at t = 0 both loop sources are constants
        std::fill(context_feedback.begin(), context_feedback.end(), 0.0);
        gesture_feedback.fill(0.0);
        if (t > 0) {
            const std::size_t ctx = cfg.context_offset();
            for (std::size_t i = 0; i < hidden; ++i) {
                const double* w = net.w_hidden.row(i);
                for (std::size_t j = 0; j < hidden; ++j) {
                    context_feedback[j] += w[ctx + j] * dz[i];
                }
            }
            if (jordan_feedback) {
                const std::size_t gin = cfg.gesture_offset();
                for (std::size_t i = 0; i < hidden; ++i) {
                    const double* w = net.w_hidden.row(i);
                    for (std::size_t k = 0; k < kGestureUnits; ++k) {
                        gesture_feedback[k] += w[gin + k] * dz[i];
                    }
                }
            }
        }
    }
    grad.loss = grad.number_loss + grad.gesture_loss;
    return grad;
}

NetworkState init_network(const BlockConfig& cfg, Rng& rng) {
    cfg.validate();
    NetworkState net;
    net.cfg = cfg;
    net.w_hidden = glorot_uniform(cfg.hidden_size, cfg.input_width(), rng);
    net.b_hidden = Matrix(1, cfg.hidden_size);
    if (cfg.use_number_output) {
        net.w_numbers = glorot_uniform(kNumberUnits, cfg.hidden_size, rng);
        net.b_numbers = Matrix(1, kNumberUnits);
    }
    if (cfg.use_gesture_output) {
        net.w_gestures = glorot_uniform(kGestureUnits, cfg.hidden_size, rng);
        net.b_gestures = Matrix(1, kGestureUnits);
    }
    return net;
}

NetworkState stitch_pretrained(const NetworkState* stage1a, const NetworkState* stage1b,
                               const BlockConfig& cfg_stage2, Rng& rng) {
    cfg_stage2.validate();
    if (!cfg_stage2.use_visual_input || !cfg_stage2.use_number_output ||
        !cfg_stage2.use_gesture_output) {
        throw std::invalid_argument(
            "stitch_pretrained: the stage-2 config must wire the visual input and both outputs");
    }
    if (stage1a != nullptr) {
        const BlockConfig& a = stage1a->cfg;
        if (a.use_visual_input || a.gesture_in_block() || !a.use_number_output ||
            a.use_gesture_output) {
            throw std::invalid_argument(
                "stitch_pretrained: the stage-1A source must be a trigger-to-numbers network");
        }
        check_network(*stage1a);
    }
    if (stage1b != nullptr) {
        const BlockConfig& b = stage1b->cfg;
        if (!b.use_visual_input || b.gesture_in_block() || b.use_number_output ||
            !b.use_gesture_output) {
            throw std::invalid_argument(
                "stitch_pretrained: the stage-1B source must be a visual-to-gestures network");
        }
        check_network(*stage1b);
    }

    std::size_t hidden_a = stage1a != nullptr ? stage1a->cfg.hidden_size : 0;
    std::size_t hidden_b = stage1b != nullptr ? stage1b->cfg.hidden_size : 0;
    if (stage1a != nullptr && stage1b != nullptr) {
        if (hidden_a + hidden_b != cfg_stage2.hidden_size) {
            throw std::invalid_argument(
                "stitch_pretrained: source hidden sizes must sum to the stage-2 hidden size");
        }
    } else if (hidden_a >= cfg_stage2.hidden_size || hidden_b >= cfg_stage2.hidden_size) {
        throw std::invalid_argument(
            "stitch_pretrained: source hidden size must be smaller than the stage-2 hidden size");
    } else if (stage1a != nullptr) {
        hidden_b = cfg_stage2.hidden_size - hidden_a;
    } else if (stage1b != nullptr) {
        hidden_a = cfg_stage2.hidden_size - hidden_b;
    }

    NetworkState net = init_network(cfg_stage2, rng);

    if (stage1a != nullptr) {
        const NetworkState& a = *stage1a;
        const std::size_t src_ctx = a.cfg.context_offset();
        const std::size_t dst_ctx = cfg_stage2.context_offset();
        for (std::size_t i = 0; i < hidden_a; ++i) {
            net.w_hidden(i, cfg_stage2.trigger_offset()) = a.w_hidden(i, a.cfg.trigger_offset());
            for (std::size_t j = 0; j < hidden_a; ++j) {
                net.w_hidden(i, dst_ctx + j) = a.w_hidden(i, src_ctx + j);
            }
            net.b_hidden(0, i) = a.b_hidden(0, i);
        }
        for (std::size_t k = 0; k < kNumberUnits; ++k) {
            for (std::size_t i = 0; i < hidden_a; ++i) {
                net.w_numbers(k, i) = a.w_numbers(k, i);
            }
            net.b_numbers(0, k) = a.b_numbers(0, k);
        }
    }
    if (stage1b != nullptr) {
        const NetworkState& b = *stage1b;
        const std::size_t src_vis = b.cfg.visual_offset();
        const std::size_t dst_vis = cfg_stage2.visual_offset();
        const std::size_t src_ctx = b.cfg.context_offset();
        const std::size_t dst_ctx = cfg_stage2.context_offset();
        for (std::size_t r = 0; r < hidden_b; ++r) {
            const std::size_t i = hidden_a + r;
            net.w_hidden(i, cfg_stage2.trigger_offset()) = b.w_hidden(r, b.cfg.trigger_offset());
            for (std::size_t j = 0; j < kVisualUnits; ++j) {
                net.w_hidden(i, dst_vis + j) = b.w_hidden(r, src_vis + j);
            }
            for (std::size_t j = 0; j < hidden_b; ++j) {
                net.w_hidden(i, dst_ctx + hidden_a + j) = b.w_hidden(r, src_ctx + j);
            }
            net.b_hidden(0, i) = b.b_hidden(0, r);
        }
        for (std::size_t k = 0; k < kGestureUnits; ++k) {
            for (std::size_t r = 0; r < hidden_b; ++r) {
                net.w_gestures(k, hidden_a + r) = b.w_gestures(k, r);
            }
            net.b_gestures(0, k) = b.b_gestures(0, k);
        }
    }
    return net;
}

} // namespace countgest
