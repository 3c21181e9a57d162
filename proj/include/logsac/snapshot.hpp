#pragma once

// Field snapshots: row-major little-endian float64 M x M grid values in
// `<stem>.bin`, with a JSON sidecar `<stem>.json` holding
// {bc, N, M, domain, time, seed}.

#include <cstdint>
#include <filesystem>

#include "logsac/spectral.hpp"

namespace logsac {

struct SnapshotMeta {
  double time = 0.0;
  std::uint64_t seed = 0;
};

void write_snapshot(const std::filesystem::path& stem, const Field& field, const SnapshotMeta& meta);

/// Reads a snapshot back; the basis is rebuilt from the sidecar.
Field read_snapshot(const std::filesystem::path& stem, SnapshotMeta* meta = nullptr);

}  // namespace logsac
