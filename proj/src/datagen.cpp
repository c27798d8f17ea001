#include "countgest/datagen.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace countgest {

std::array<double, kVisualUnits> Scene::visual() const {
    std::array<double, kVisualUnits> v{};
    if (n_objects == 0) return v;
    const double weight = 1.0 / static_cast<double>(n_objects);
    for (std::size_t p : object_positions) v[p] = weight;
    return v;
}

Scene gen_scene(std::size_t n_objects, Rng& rng) {
    if (n_objects > kMaxObjects) {
        throw std::invalid_argument("gen_scene: at most 10 objects per scene");
    }
    std::array<std::size_t, kVisualUnits> indices;
    std::iota(indices.begin(), indices.end(), 0);
    for (std::size_t i = 0; i < n_objects; ++i) {
        const std::size_t j = i + rng.uniform_below(kVisualUnits - i);
        std::swap(indices[i], indices[j]);
    }
    Scene scene;
    scene.n_objects = n_objects;
    scene.object_positions.assign(indices.begin(), indices.begin() + n_objects);
    std::sort(scene.object_positions.begin(), scene.object_positions.end());
    for (std::size_t p : scene.object_positions) scene.occupancy[p] = true;
    return scene;
}

SequencePair build_sequence_pair(const Scene& scene, GestureConvention convention,
                                 const GestureTable& table) {
    SequencePair pair;
    pair.scene = scene;
    pair.convention = convention;
    if (convention == GestureConvention::go_to_base) {
        const double* base = table.base();
        std::copy(base, base + kGestureUnits, pair.rest_vector.begin());
    }

    const std::array<double, kVisualUnits> visual = scene.visual();
    const std::size_t n = scene.n_objects;

    auto make_sequence = [&](bool trigger_on) {
        SequenceData seq;
        seq.trigger.assign(kSequenceSteps, trigger_on ? 1.0 : 0.0);
        seq.visual = Matrix(kSequenceSteps, kVisualUnits);
        seq.numbers = Matrix(kSequenceSteps, kNumberUnits);
        seq.gestures = Matrix(kSequenceSteps, kGestureUnits);
        for (std::size_t t = 0; t < kSequenceSteps; ++t) {
            std::copy(visual.begin(), visual.end(), seq.visual.row(t));
        }
        return seq;
    };

    pair.off_sequence = make_sequence(false);
    for (std::size_t t = 0; t < kSequenceSteps; ++t) {
        std::copy(pair.rest_vector.begin(), pair.rest_vector.end(),
                  pair.off_sequence.gestures.row(t));
    }

    pair.on_sequence = make_sequence(true);
    std::array<double, kGestureUnits> current = pair.rest_vector;
    for (std::size_t t = 0; t < kSequenceSteps; ++t) {
        double* gesture = pair.on_sequence.gestures.row(t);
        if (t < n) {
            pair.on_sequence.numbers(t, t) = 1.0; // word t+1 is one-hot at unit t
            const double* entry = table.entry(scene.object_positions[t]);
            std::copy(entry, entry + kGestureUnits, current.begin());
            std::copy(current.begin(), current.end(), gesture);
        } else if (convention == GestureConvention::stay_at_last) {
            std::copy(current.begin(), current.end(), gesture);
        } else {
            std::copy(pair.rest_vector.begin(), pair.rest_vector.end(), gesture);
        }
    }
    return pair;
}

SubEpochSet gen_sub_epoch(GestureConvention convention, const GestureTable& table, Rng& rng) {
    SubEpochSet set;
    set.pairs.reserve(kNumerosities);
    for (std::size_t n = 0; n < kNumerosities; ++n) {
        set.pairs.push_back(build_sequence_pair(gen_scene(n, rng), convention, table));
    }
    rng.shuffle(set.pairs);
    return set;
}

BlockConfig ConditionSpec::block_config(std::size_t hidden_size) const {
    BlockConfig cfg;
    cfg.use_visual_input = visual_input;
    cfg.use_gesture_input = gesture_input;
    cfg.use_number_output = number_output;
    cfg.use_gesture_output = gesture_output;
    cfg.use_jordan_loop = jordan_loop;
    cfg.hidden_size = hidden_size;
    cfg.validate();
    return cfg;
}

ConditionSpec ConditionSpec::study1(int id, GestureConvention convention) {
    ConditionSpec spec;
    spec.condition_id = id;
    spec.convention = convention;
    switch (id) {
    case 1: spec.visual_input = true; spec.number_output = true; break;
    case 2: spec.visual_input = true; spec.gesture_output = true; break;
    case 3: spec.visual_input = true; spec.number_output = true; spec.gesture_output = true; break;
    case 4:
        spec.visual_input = true;
        spec.number_output = true;
        spec.gesture_output = true;
        spec.jordan_loop = true;
        break;
    case 5: spec.gesture_input = true; spec.number_output = true; break;
    case 6: spec.gesture_input = true; spec.number_output = true; spec.gesture_output = true; break;
    case 7: spec.visual_input = true; spec.gesture_input = true; spec.number_output = true; break;
    case 8:
        spec.visual_input = true;
        spec.gesture_input = true;
        spec.number_output = true;
        spec.gesture_output = true;
        break;
    default:
        throw std::invalid_argument("ConditionSpec::study1: condition id must be 1..8, got " +
                                    std::to_string(id));
    }
    return spec;
}

ConditionSpec ConditionSpec::recitation() {
    ConditionSpec spec;
    spec.condition_id = 0;
    spec.number_output = true;
    return spec;
}

WiredSequence wire_sequence(const ConditionSpec& spec, const SequencePair& pair,
                            const SequenceData& seq) {
    WiredSequence wired;
    wired.inputs.trigger = seq.trigger;
    if (spec.visual_input) wired.inputs.visual = seq.visual;
    if (spec.gesture_input) wired.inputs.gesture_in = seq.gestures;
    if (spec.jordan_loop) wired.inputs.jordan_initial = pair.rest_vector;
    if (spec.number_output) wired.targets.numbers = seq.numbers;
    if (spec.gesture_output) wired.targets.gestures = seq.gestures;
    return wired;
}

std::array<WiredSequence, 2> wire_condition(const ConditionSpec& spec, const SequencePair& pair) {
    if (spec.convention != pair.convention) {
        throw std::invalid_argument(
            "wire_condition: the pair was built under a different gesture convention");
    }
    return {wire_sequence(spec, pair, pair.off_sequence),
            wire_sequence(spec, pair, pair.on_sequence)};
}

} // namespace countgest
