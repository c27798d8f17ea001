#include "countgest/io.hpp"

#include "countgest/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace countgest {

namespace {

void expect_token(std::istream& in, const std::string& expected, const std::string& path) {
    std::string token;
    if (!(in >> token) || token != expected) {
        throw ConfigError(path + ": expected '" + expected + "', found '" + token + "'");
    }
}

double read_double(std::istream& in, const std::string& path) {
    double value = 0.0;
    if (!(in >> value)) {
        throw ConfigError(path + ": malformed or truncated numeric field");
    }
    return value;
}

std::size_t read_count(std::istream& in, const std::string& path) {
    long long value = 0;
    if (!(in >> value) || value < 0) {
        throw ConfigError(path + ": malformed count field");
    }
    return static_cast<std::size_t>(value);
}

void write_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
    out << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) out << ' ';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
}

Matrix read_matrix(std::istream& in, const std::string& name, const std::string& path) {
    expect_token(in, "matrix", path);
    expect_token(in, name, path);
    const std::size_t rows = read_count(in, path);
    const std::size_t cols = read_count(in, path);
    Matrix m(rows, cols);
    for (double& v : m) v = read_double(in, path);
    return m;
}

std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write to '" + path + "'");
    }
    return out;
}

std::ifstream open_for_read(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    return in;
}

void check_header(std::istream& in, const std::string& magic, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line != magic) {
        throw ConfigError(path + ": not a " + magic + " file");
    }
}

constexpr const char* kTableMagic = "countgest-gesture-table v1";
constexpr const char* kCheckpointMagic = "countgest-checkpoint v1";

} // namespace

std::string format_double(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", value);
    return buffer;
}

void save_gesture_table(const GestureTable& table, const std::string& path) {
    std::ofstream out = open_for_write(path);
    out << kTableMagic << '\n';
    out << "variance_fraction " << format_double(table.variance_fraction) << '\n';
    out << "scale " << format_double(table.scale) << '\n';
    out << "pca_mean " << table.pca.mean.size();
    for (double v : table.pca.mean) out << ' ' << format_double(v);
    out << '\n';
    out << "pca_variance_fractions " << table.pca.variance_fractions.size();
    for (double v : table.pca.variance_fractions) out << ' ' << format_double(v);
    out << '\n';
    write_matrix(out, "pca_basis", table.pca.basis);
    write_matrix(out, "vectors", table.vectors);
    if (!out) {
        throw ConfigError("failed writing gesture table to '" + path + "'");
    }
}

GestureTable load_gesture_table(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_header(in, kTableMagic, path);

    GestureTable table;
    expect_token(in, "variance_fraction", path);
    table.variance_fraction = read_double(in, path);
    expect_token(in, "scale", path);
    table.scale = read_double(in, path);
    expect_token(in, "pca_mean", path);
    table.pca.mean.resize(read_count(in, path));
    for (double& v : table.pca.mean) v = read_double(in, path);
    expect_token(in, "pca_variance_fractions", path);
    table.pca.variance_fractions.resize(read_count(in, path));
    for (double& v : table.pca.variance_fractions) v = read_double(in, path);
    table.pca.basis = read_matrix(in, "pca_basis", path);
    table.vectors = read_matrix(in, "vectors", path);

    if (table.vectors.rows() != kGestureEntries || table.vectors.cols() != kGestureDim) {
        throw ConfigError(path + ": gesture vector block must be 21 x 3");
    }
    if (table.pca.mean.size() != kArmJoints || table.pca.basis.rows() != kArmJoints ||
        table.pca.basis.cols() != kGestureDim ||
        table.pca.variance_fractions.size() != kGestureDim) {
        throw ConfigError(path + ": PCA block does not describe a 6-joint, 3-component model");
    }
    if (!(table.variance_fraction > 0.97)) {
        throw ConfigError(path + ": variance fraction must exceed 0.97");
    }
    if (table.scale <= 0.0) {
        throw ConfigError(path + ": scale must be positive");
    }
    if (table.min_pairwise_distance() <= 0.0) {
        throw ConfigError(path + ": gesture vectors are not pairwise distinct");
    }
    return table;
}

void save_checkpoint(const NetworkState& net, const std::string& path) {
    net.cfg.validate();
    std::ofstream out = open_for_write(path);
    out << kCheckpointMagic << '\n';
    out << "config " << (net.cfg.use_visual_input ? 1 : 0) << ' '
        << (net.cfg.use_gesture_input ? 1 : 0) << ' ' << (net.cfg.use_number_output ? 1 : 0)
        << ' ' << (net.cfg.use_gesture_output ? 1 : 0) << ' '
        << (net.cfg.use_jordan_loop ? 1 : 0) << ' ' << net.cfg.hidden_size << '\n';
    write_matrix(out, "w_hidden", net.w_hidden);
    write_matrix(out, "b_hidden", net.b_hidden);
    write_matrix(out, "w_numbers", net.w_numbers);
    write_matrix(out, "b_numbers", net.b_numbers);
    write_matrix(out, "w_gestures", net.w_gestures);
    write_matrix(out, "b_gestures", net.b_gestures);
    out << "end\n";
    if (!out) {
        throw ConfigError("failed writing checkpoint to '" + path + "'");
    }
}

NetworkState load_checkpoint(const std::string& path) {
    std::ifstream in = open_for_read(path);
    check_header(in, kCheckpointMagic, path);

    NetworkState net;
    expect_token(in, "config", path);
    net.cfg.use_visual_input = read_count(in, path) != 0;
    net.cfg.use_gesture_input = read_count(in, path) != 0;
    net.cfg.use_number_output = read_count(in, path) != 0;
    net.cfg.use_gesture_output = read_count(in, path) != 0;
    net.cfg.use_jordan_loop = read_count(in, path) != 0;
    net.cfg.hidden_size = read_count(in, path);
    try {
        net.cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path + ": " + e.what());
    }

    net.w_hidden = read_matrix(in, "w_hidden", path);
    net.b_hidden = read_matrix(in, "b_hidden", path);
    net.w_numbers = read_matrix(in, "w_numbers", path);
    net.b_numbers = read_matrix(in, "b_numbers", path);
    net.w_gestures = read_matrix(in, "w_gestures", path);
    net.b_gestures = read_matrix(in, "b_gestures", path);
    expect_token(in, "end", path);

    auto check = [&](const Matrix& m, std::size_t rows, std::size_t cols, const char* name) {
        if (m.rows() != rows || m.cols() != cols) {
            throw ConfigError(path + ": " + name + " has the wrong shape for its config");
        }
    };
    check(net.w_hidden, net.cfg.hidden_size, net.cfg.input_width(), "w_hidden");
    check(net.b_hidden, 1, net.cfg.hidden_size, "b_hidden");
    if (net.cfg.use_number_output) {
        check(net.w_numbers, kNumberUnits, net.cfg.hidden_size, "w_numbers");
        check(net.b_numbers, 1, kNumberUnits, "b_numbers");
    } else {
        check(net.w_numbers, 0, 0, "w_numbers");
        check(net.b_numbers, 0, 0, "b_numbers");
    }
    if (net.cfg.use_gesture_output) {
        check(net.w_gestures, kGestureUnits, net.cfg.hidden_size, "w_gestures");
        check(net.b_gestures, 1, kGestureUnits, "b_gestures");
    } else {
        check(net.w_gestures, 0, 0, "w_gestures");
        check(net.b_gestures, 0, 0, "b_gestures");
    }
    return net;
}

} // namespace countgest
