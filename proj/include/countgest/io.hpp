#pragma once

#include "countgest/gesture.hpp"
#include "countgest/network.hpp"

#include <string>

namespace countgest {

/// Shortest representation that round-trips a double exactly ("%.17g").
std::string format_double(double value);

/// Versioned text formats. Loading validates the header and every shape and
/// throws ConfigError with a diagnostic on any mismatch. A save/load round
/// trip is bit-exact.
void save_gesture_table(const GestureTable& table, const std::string& path);
GestureTable load_gesture_table(const std::string& path);

void save_checkpoint(const NetworkState& net, const std::string& path);
NetworkState load_checkpoint(const std::string& path);

} // namespace countgest
