#pragma once

#include <filesystem>
#include <string>

#include "adjopinf/pod.hpp"
#include "adjopinf/snapshot.hpp"

namespace adjopinf {

// Binary container, all fields little-endian:
//   bytes 0..3    magic ("AOSN" snapshots, "AOPB" POD basis)
//   bytes 4..7    u32 format version
//   bytes 8..15   u64 rows (n)
//   bytes 16..23  u64 columns (k snapshots, or r modes)
//   bytes 24..31  u64 trailer length (0 for AOSN, singular-value count for AOPB)
//   columns as f64, column-major
//   trailer: AOSN -> k time stamps, AOPB -> singular values
inline constexpr std::uint32_t kContainerVersion = 1;

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& snap);
SnapshotMatrix read_snapshots(const std::filesystem::path& path);

void write_pod_basis(const std::filesystem::path& path, const PodBasis& basis);
PodBasis read_pod_basis(const std::filesystem::path& path);

/// Writes `<path>.json` next to a container with the given JSON text.
void write_sidecar(const std::filesystem::path& path, const std::string& json_text);
std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace adjopinf
