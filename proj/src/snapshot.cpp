#include "biflow/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "biflow/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; byte-swapping is not implemented");

namespace biflow {

void write_snapshot(const std::string& path, const Field& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("write_snapshot: cannot open " + path);
    const GridSpec& g = field.grid();
    char header[16] = {};
    std::memcpy(header, "BIFL", 4);
    header[4] = static_cast<char>(g.dim);
    const std::uint32_t n = static_cast<std::uint32_t>(g.points_per_axis);
    const float length = static_cast<float>(g.box_length);
    std::memcpy(header + 8, &n, 4);
    std::memcpy(header + 12, &length, 4);
    out.write(header, sizeof(header));
    const auto& v = field.values();
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!out) throw DomainError("write_snapshot: write failed for " + path);
}

Field read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("read_snapshot: cannot open " + path);
    char header[16];
    in.read(header, sizeof(header));
    if (!in || std::memcmp(header, "BIFL", 4) != 0)
        throw DomainError("read_snapshot: bad magic in " + path);
    const int dim = static_cast<int>(header[4]);
    std::uint32_t n = 0;
    float length = 0.0f;
    std::memcpy(&n, header + 8, 4);
    std::memcpy(&length, header + 12, 4);
    GridSpec grid = make_grid(dim, static_cast<int>(n), static_cast<double>(length));
    std::vector<double> values(grid.point_count());
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DomainError("read_snapshot: truncated file " + path);
    return Field::from_values(std::move(grid), std::move(values));
}

}  // namespace biflow
