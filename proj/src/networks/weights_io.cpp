#include "nclab/networks.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace nclab::networks {

namespace {

constexpr char kMagic[4] = {'N', 'C', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw std::runtime_error("read_weights: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

void put_matrix(std::ostream& out, const Matrix& M) {
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j) put<double>(out, M(i, j));
}

Matrix get_matrix(std::istream& in, std::uint64_t rows, std::uint64_t cols) {
    Matrix M(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j) M(i, j) = get<double>(in);
    return M;
}

}  // namespace

void write_weights(const std::filesystem::path& path, const ShallowNet& net) {
    net.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_weights: cannot open " + path.string());
    out.write(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(net.depth));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(net.input_dim()));
    put<std::uint64_t>(out, net.depth == 3 ? static_cast<std::uint64_t>(net.W1.cols()) : 0);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(net.feature_dim()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(net.classes()));
    put_matrix(out, net.W1);
    if (net.depth == 3) put_matrix(out, net.W2);
    put_matrix(out, net.W);
    if (!out) throw std::runtime_error("write_weights: write failed for " + path.string());
}

ShallowNet read_weights(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_weights: cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("read_weights: bad magic");
    if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("read_weights: unsupported version");
    ShallowNet net;
    net.depth = static_cast<int>(get<std::uint32_t>(in));
    const auto d = get<std::uint64_t>(in), d1 = get<std::uint64_t>(in), D = get<std::uint64_t>(in), K = get<std::uint64_t>(in);
    if (net.depth != 2 && net.depth != 3) throw std::runtime_error("read_weights: bad depth");
    constexpr std::uint64_t kLimit = 1ull << 32;
    if (d >= kLimit || d1 >= kLimit || D >= kLimit || K >= kLimit) throw std::runtime_error("read_weights: implausible dimensions");
    net.W1 = get_matrix(in, d, net.depth == 3 ? d1 : D);
    if (net.depth == 3) net.W2 = get_matrix(in, d1, D);
    net.W = get_matrix(in, D, K);
    net.validate();
    return net;
}

}  // namespace nclab::networks
