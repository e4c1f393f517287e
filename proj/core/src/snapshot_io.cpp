#include "adjopinf/snapshot_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "adjopinf/error.hpp"

namespace adjopinf {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr std::array<char, 4> kSnapshotMagic{'A', 'O', 'S', 'N'};
constexpr std::array<char, 4> kBasisMagic{'A', 'O', 'P', 'B'};

struct Header {
    std::array<char, 4> magic{};
    std::uint32_t version = 0;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::uint64_t trailer = 0;
};

void write_header(std::ofstream& out, const Header& h) {
    out.write(h.magic.data(), 4);
    out.write(reinterpret_cast<const char*>(&h.version), 4);
    out.write(reinterpret_cast<const char*>(&h.rows), 8);
    out.write(reinterpret_cast<const char*>(&h.cols), 8);
    out.write(reinterpret_cast<const char*>(&h.trailer), 8);
}

Header read_header(std::ifstream& in, const std::array<char, 4>& magic,
                   const std::filesystem::path& path) {
    Header h;
    in.read(h.magic.data(), 4);
    in.read(reinterpret_cast<char*>(&h.version), 4);
    in.read(reinterpret_cast<char*>(&h.rows), 8);
    in.read(reinterpret_cast<char*>(&h.cols), 8);
    in.read(reinterpret_cast<char*>(&h.trailer), 8);
    if (!in) throw ConfigError("truncated container header in " + path.string());
    if (h.magic != magic) {
        throw ConfigError("bad magic in " + path.string() + ": expected " +
                          std::string(magic.data(), 4));
    }
    if (h.version != kContainerVersion) {
        throw ConfigError("unsupported container version in " + path.string());
    }
    return h;
}

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n, const std::filesystem::path& path) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw ConfigError("truncated container payload in " + path.string());
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    return in;
}

}  // namespace

void write_snapshots(const std::filesystem::path& path, const SnapshotMatrix& snap) {
    auto out = open_out(path);
    Header h{kSnapshotMagic, kContainerVersion, static_cast<std::uint64_t>(snap.rows()),
             static_cast<std::uint64_t>(snap.count()), 0};
    write_header(out, h);
    write_doubles(out, snap.states().data(), static_cast<std::size_t>(snap.states().size()));
    write_doubles(out, snap.times().data(), static_cast<std::size_t>(snap.count()));
    if (!out) throw Error("write failed for " + path.string());
}

SnapshotMatrix read_snapshots(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, kSnapshotMagic, path);
    const auto n = static_cast<Eigen::Index>(h.rows), k = static_cast<Eigen::Index>(h.cols);
    Eigen::MatrixXd states(n, k);
    Eigen::VectorXd times(k);
    read_doubles(in, states.data(), static_cast<std::size_t>(states.size()), path);
    read_doubles(in, times.data(), static_cast<std::size_t>(k), path);
    return SnapshotMatrix(std::move(states), std::move(times));
}

void write_pod_basis(const std::filesystem::path& path, const PodBasis& basis) {
    auto out = open_out(path);
    Header h{kBasisMagic, kContainerVersion, static_cast<std::uint64_t>(basis.n()),
             static_cast<std::uint64_t>(basis.r()),
             static_cast<std::uint64_t>(basis.singular_values.size())};
    write_header(out, h);
    write_doubles(out, basis.modes.data(), static_cast<std::size_t>(basis.modes.size()));
    write_doubles(out, basis.singular_values.data(),
                  static_cast<std::size_t>(basis.singular_values.size()));
    if (!out) throw Error("write failed for " + path.string());
}

PodBasis read_pod_basis(const std::filesystem::path& path) {
    auto in = open_in(path);
    const Header h = read_header(in, kBasisMagic, path);
    PodBasis basis;
    basis.modes.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
    basis.singular_values.resize(static_cast<Eigen::Index>(h.trailer));
    read_doubles(in, basis.modes.data(), static_cast<std::size_t>(basis.modes.size()), path);
    read_doubles(in, basis.singular_values.data(), static_cast<std::size_t>(h.trailer), path);
    const double cutoff =
        basis.singular_values.size() > 0 ? 1e-12 * basis.singular_values[0] : 0.0;
    while (basis.numerical_rank < basis.singular_values.size() &&
           basis.singular_values[basis.numerical_rank] > cutoff) {
        ++basis.numerical_rank;
    }
    return basis;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
    return std::filesystem::path(path.string() + ".json");
}

void write_sidecar(const std::filesystem::path& path, const std::string& json_text) {
    std::ofstream out(sidecar_path(path), std::ios::trunc);
    if (!out) throw Error("cannot write metadata for " + path.string());
    out << json_text << '\n';
}

}  // namespace adjopinf
