#include "alasso/core/rng.hpp"

#include "alasso/core/error.hpp"

#include <cmath>

namespace alasso {

std::uint64_t mix64(std::uint64_t x) noexcept
{
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream)
{
    std::seed_seq seq{
        static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
        0x616c6173u,
    };
    return std::mt19937_64(seq);
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(make_engine(master_seed, stream_id))
{}

RngStream RngStream::substream(std::uint64_t index) const
{
    return RngStream(master_seed_, mix64(stream_id_ ^ mix64(index + 0x5bd1e995ULL)));
}

double RngStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t RngStream::uniform_index(std::size_t n)
{
    if (n == 0) fail(ErrorCode::InvalidArgument, "uniform_index over an empty range");
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t r = engine_();
        if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
}

double RngStream::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * m;
    has_spare_ = true;
    return u * m;
}

} // namespace alasso
