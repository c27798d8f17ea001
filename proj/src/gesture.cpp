#include "countgest/gesture.hpp"

#include "countgest/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace countgest {

namespace {

struct Mat3 {
    double m[3][3];
};

Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j] + a.m[i][2] * b.m[2][j];
        }
    }
    return r;
}

Point3 operator*(const Mat3& a, const Point3& p) {
    return {a.m[0][0] * p[0] + a.m[0][1] * p[1] + a.m[0][2] * p[2],
            a.m[1][0] * p[0] + a.m[1][1] * p[1] + a.m[1][2] * p[2],
            a.m[2][0] * p[0] + a.m[2][1] * p[1] + a.m[2][2] * p[2]};
}

Mat3 rot_x(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{1, 0, 0}, {0, c, -s}, {0, s, c}}};
}

Mat3 rot_y(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{c, 0, s}, {0, 1, 0}, {-s, 0, c}}};
}

Mat3 rot_z(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {{{c, -s, 0}, {s, c, 0}, {0, 0, 1}}};
}

double norm3(const Point3& p) {
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

// Solve the symmetric positive-definite 3x3 system A x = b in place.
Point3 solve3(double a[3][3], const Point3& b) {
    double aug[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) aug[i][j] = a[i][j];
        aug[i][3] = b[i];
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::fabs(aug[r][col]) > std::fabs(aug[pivot][col])) pivot = r;
        }
        for (int j = 0; j < 4; ++j) std::swap(aug[col][j], aug[pivot][j]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = aug[r][col] / aug[col][col];
            for (int j = col; j < 4; ++j) aug[r][j] -= factor * aug[col][j];
        }
    }
    return {aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]};
}

constexpr int kIkIterations = 300;
constexpr double kIkDamping = 0.1;
constexpr double kIkResidualTolerance = 1e-3;  // 1 mm
constexpr double kJacobianStep = 1e-6;

} // namespace

ArmModel::ArmModel(const ArmGeometry& geometry) : geometry_(geometry) {
    if (geometry_.upper_arm_length <= 0.0 || geometry_.forearm_length <= 0.0) {
        throw ConfigError("ArmModel: segment lengths must be positive");
    }
    if (geometry_.line_length <= 0.0) {
        throw ConfigError("ArmModel: target line length must be positive");
    }
    // every target must be reachable before the model is usable
    for (std::size_t i = 0; i < kTargetCount; ++i) {
        solve_pointing(i);
    }
}

Point3 ArmModel::target_point(std::size_t index) const {
    if (index >= kTargetCount) {
        throw std::invalid_argument("ArmModel::target_point: index out of range");
    }
    const double t = static_cast<double>(index) / static_cast<double>(kTargetCount - 1);
    // index 0 is the leftmost target (+y), index 19 the rightmost
    return {geometry_.line_forward, geometry_.line_length / 2.0 - geometry_.line_length * t,
            geometry_.line_height};
}

Point3 ArmModel::fingertip(const JointVector& q) const {
    const Mat3 torso = rot_z(q[0]) * rot_y(q[1]);
    const Point3 shoulder_offset = {geometry_.shoulder_offset_x, geometry_.shoulder_offset_y,
                                    geometry_.shoulder_offset_z};
    const Point3 shoulder = torso * shoulder_offset;

    const Mat3 upper = torso * rot_y(q[2]) * rot_x(q[3]) * rot_z(q[4]);
    const Point3 upper_arm = upper * Point3{0.0, 0.0, -geometry_.upper_arm_length};

    const Mat3 lower = upper * rot_y(q[5]);
    const Point3 forearm = lower * Point3{0.0, 0.0, -geometry_.forearm_length};

    return {shoulder[0] + upper_arm[0] + forearm[0], shoulder[1] + upper_arm[1] + forearm[1],
            shoulder[2] + upper_arm[2] + forearm[2]};
}

JointVector ArmModel::solve_pointing(std::size_t target_index) const {
    const Point3 target = target_point(target_index);
    JointVector q{};  // fixed initial pose: rest

    for (int iter = 0; iter < kIkIterations; ++iter) {
        const Point3 tip = fingertip(q);
        const Point3 error = {target[0] - tip[0], target[1] - tip[1], target[2] - tip[2]};

        // central-difference Jacobian, 3 x 6
        double jac[3][kArmJoints];
        for (std::size_t j = 0; j < kArmJoints; ++j) {
            JointVector plus = q, minus = q;
            plus[j] += kJacobianStep;
            minus[j] -= kJacobianStep;
            const Point3 tp = fingertip(plus);
            const Point3 tm = fingertip(minus);
            for (int d = 0; d < 3; ++d) {
                jac[d][j] = (tp[d] - tm[d]) / (2.0 * kJacobianStep);
            }
        }

        // damped least squares: dq = J^T (J J^T + lambda^2 I)^-1 e
        double jjt[3][3];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (std::size_t j = 0; j < kArmJoints; ++j) acc += jac[r][j] * jac[c][j];
                jjt[r][c] = acc;
            }
            jjt[r][r] += kIkDamping * kIkDamping;
        }
        const Point3 y = solve3(jjt, error);
        for (std::size_t j = 0; j < kArmJoints; ++j) {
            q[j] += jac[0][j] * y[0] + jac[1][j] * y[1] + jac[2][j] * y[2];
        }
    }

    const Point3 tip = fingertip(q);
    const Point3 residual = {target[0] - tip[0], target[1] - tip[1], target[2] - tip[2]};
    if (norm3(residual) > kIkResidualTolerance) {
        throw ConfigError("ArmModel: target " + std::to_string(target_index) +
                          " unreachable with the configured segment lengths (residual " +
                          std::to_string(norm3(residual)) + " m)");
    }
    return q;
}

double GestureTable::min_pairwise_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < vectors.rows(); ++i) {
        for (std::size_t j = i + 1; j < vectors.rows(); ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < vectors.cols(); ++c) {
                const double d = vectors(i, c) - vectors(j, c);
                d2 += d * d;
            }
            best = std::min(best, std::sqrt(d2));
        }
    }
    return best;
}

GestureTable build_gesture_table(const ArmModel& arm) {
    Matrix postures(kGestureEntries, kArmJoints);
    for (std::size_t i = 0; i < kTargetCount; ++i) {
        const JointVector q = arm.solve_pointing(i);
        for (std::size_t j = 0; j < kArmJoints; ++j) postures(i, j) = q[j];
    }
    // base posture: all joints at rest (row stays zero)

    GestureTable table;
    table.pca = pca_fit(postures, kGestureDim);
    table.variance_fraction = table.pca.cumulative_fraction();
    if (table.variance_fraction <= 0.97) {
        throw ConfigError("build_gesture_table: 3 components carry only " +
                          std::to_string(table.variance_fraction * 100.0) +
                          "% of the variance; adjust the arm geometry");
    }

    Matrix projected(kGestureEntries, kGestureDim);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < kGestureEntries; ++i) {
        const auto p = table.pca.project(postures.row(i));
        for (std::size_t c = 0; c < kGestureDim; ++c) {
            projected(i, c) = p[c];
            max_abs = std::max(max_abs, std::fabs(p[c]));
        }
    }
    if (max_abs <= 0.0) {
        throw ConfigError("build_gesture_table: projected postures collapsed to zero");
    }
    table.scale = max_abs;
    for (double& v : projected) v /= max_abs;
    table.vectors = std::move(projected);

    if (table.min_pairwise_distance() <= 1e-9) {
        throw ConfigError("build_gesture_table: projected postures are not pairwise distinct");
    }

    // evaluation relies on a spatially ordered component surviving projection
    bool monotone = false;
    for (std::size_t c = 0; c < kGestureDim && !monotone; ++c) {
        bool increasing = true, decreasing = true;
        for (std::size_t i = 1; i < kTargetCount; ++i) {
            if (table.vectors(i, c) <= table.vectors(i - 1, c)) increasing = false;
            if (table.vectors(i, c) >= table.vectors(i - 1, c)) decreasing = false;
        }
        monotone = increasing || decreasing;
    }
    if (!monotone) {
        throw ConfigError("build_gesture_table: no component is monotone over the target sweep");
    }

    return table;
}

} // namespace countgest
