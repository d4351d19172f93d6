#include "nclab/core.hpp"

namespace nclab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream_id) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(seed), hi(seed), lo(stream_id), hi(stream_id)};
    return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(seeded_engine(seed, stream_id)) {}

RngStream RngStream::substream(std::uint64_t index) const {
    return RngStream(seed_, splitmix64(stream_id_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return uniform_(engine_); }

std::uint64_t RngStream::below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

Matrix RngStream::gaussian(Index rows, Index cols) {
    Matrix M(rows, cols);
    // Fill column by column so the draw order matches the storage order.
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) M(i, j) = normal_(engine_);
    return M;
}

Vector RngStream::gaussian(Index size) {
    Vector v(size);
    for (Index i = 0; i < size; ++i) v(i) = normal_(engine_);
    return v;
}

}  // namespace nclab
