#pragma once

#include <string>

#include "biflow/grid.hpp"

namespace biflow {

/// Binary field snapshot: 16-byte header (magic "BIFL", u8 dim, 3 reserved
/// bytes, u32 points_per_axis, f32 box_length), then float64 samples in
/// row-major order, little-endian.
void write_snapshot(const std::string& path, const Field& field);
Field read_snapshot(const std::string& path);

}  // namespace biflow
