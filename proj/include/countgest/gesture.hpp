#pragma once

#include "countgest/matrix.hpp"
#include "countgest/pca.hpp"

#include <array>
#include <cstddef>

namespace countgest {

inline constexpr std::size_t kArmJoints = 6;
inline constexpr std::size_t kTargetCount = 20;
inline constexpr std::size_t kGestureEntries = 21;  // 20 pointing postures + base
inline constexpr std::size_t kGestureDim = 3;

/// Segment lengths and workspace definition of the synthetic pointing arm.
/// Distances in meters, base frame at the hip: x forward, y left, z up.
struct ArmGeometry {
    double shoulder_offset_x = 0.0;
    double shoulder_offset_y = -0.09;  // right side of the body
    double shoulder_offset_z = 0.28;
    double upper_arm_length = 0.15;
    double forearm_length = 0.14;
    double line_forward = 0.30;  // target line: 30 cm in front
    double line_height = 0.15;   // 15 cm above the hip
    double line_length = 0.30;   // spanning 30 cm, left to right
};

using JointVector = std::array<double, kArmJoints>;
using Point3 = std::array<double, 3>;

/// Six degree-of-freedom kinematic chain (torso yaw/pitch, shoulder
/// pitch/roll/yaw, elbow) used to synthesize proprioceptive pointing
/// postures. Joint angles in radians; the rest pose is all zeros with
/// the arm hanging down beside the body.
class ArmModel {
public:
    explicit ArmModel(const ArmGeometry& geometry = {});

    const ArmGeometry& geometry() const { return geometry_; }

    /// Workspace point for a target index, 0 = leftmost of the 20.
    Point3 target_point(std::size_t index) const;

    /// Forward kinematics: fingertip position for a joint configuration.
    Point3 fingertip(const JointVector& joints) const;

    /// Damped-least-squares inverse kinematics from the rest pose, fixed
    /// iteration count. Deterministic: same index, same angles. Throws
    /// ConfigError when the residual exceeds 1 mm (unreachable target).
    JointVector solve_pointing(std::size_t target_index) const;

private:
    ArmGeometry geometry_;
};

/// Canonical 3-component gesture vectors: the 20 pointing postures plus
/// the base posture, projected through PCA and scaled so every component
/// lies in [-1, 1].
struct GestureTable {
    static constexpr std::size_t kBaseIndex = 20;

    Matrix vectors;  // 21 x 3
    PcaModel pca;
    double scale = 1.0;             // global max-abs projected value
    double variance_fraction = 0.0; // cumulative over the 3 components

    const double* entry(std::size_t index) const { return vectors.row(index); }
    const double* base() const { return vectors.row(kBaseIndex); }

    /// Smallest Euclidean distance between any two of the 21 entries.
    double min_pairwise_distance() const;
};

/// Solve all 20 pointing postures, append the base posture, fit PCA with
/// 3 components and scale the projections. Throws ConfigError when the
/// variance fraction is not above 0.97 or the projected entries collapse.
GestureTable build_gesture_table(const ArmModel& arm);

} // namespace countgest
