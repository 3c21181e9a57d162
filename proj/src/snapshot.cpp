#include "logsac/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace logsac {

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& stem, const Field& field, const SnapshotMeta& meta) {
  const SpectralBasis& basis = field.basis();
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());

  std::ofstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open snapshot file for writing: " + stem.string());
  for (double v : field.values()) {
    std::uint64_t raw = to_little_endian(std::bit_cast<std::uint64_t>(v));
    bin.write(reinterpret_cast<const char*>(&raw), sizeof raw);
  }

  const double lo = basis.origin();
  const double hi = lo + basis.side_length();
  nlohmann::json side = {
      {"bc", to_string(basis.bc())},
      {"N", basis.modes()},
      {"M", basis.grid_points()},
      {"domain", {{lo, hi}, {lo, hi}}},
      {"time", meta.time},
      {"seed", meta.seed},
  };
  std::ofstream js(with_suffix(stem, ".json"));
  js << side.dump(2) << '\n';
}

Field read_snapshot(const std::filesystem::path& stem, SnapshotMeta* meta) {
  std::ifstream js(with_suffix(stem, ".json"));
  if (!js) throw std::runtime_error("cannot open snapshot sidecar: " + stem.string());
  const nlohmann::json side = nlohmann::json::parse(js);
  const Boundary bc = boundary_from_string(side.at("bc").get<std::string>());
  const int n = side.at("N").get<int>();
  const int m = side.at("M").get<int>();
  auto basis = std::make_shared<const SpectralBasis>(bc, n, m);

  std::ifstream bin(with_suffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open snapshot data: " + stem.string());
  std::vector<double> values(basis->grid_size());
  for (double& v : values) {
    std::uint64_t raw = 0;
    if (!bin.read(reinterpret_cast<char*>(&raw), sizeof raw)) {
      throw std::runtime_error("snapshot data truncated: " + stem.string());
    }
    v = std::bit_cast<double>(to_little_endian(raw));
  }
  if (meta) {
    meta->time = side.at("time").get<double>();
    meta->seed = side.at("seed").get<std::uint64_t>();
  }
  return Field::from_grid(std::move(basis), std::move(values));
}

}  // namespace logsac
