#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace alasso {

/// A reproducible random stream keyed by (master_seed, stream_id).
///
/// The integer sequence depends only on the key: the engine is mt19937_64
/// seeded through std::seed_seq, both of which are fully specified by the
/// standard. Uniform and normal variates are derived here rather than through
/// the std distributions, whose algorithms are implementation-defined.
class RngStream
{
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Child stream; the child id is a bijective mix of (stream_id, index) so
    /// nested substreams never alias their parent's siblings in practice.
    RngStream substream(std::uint64_t index) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform integer in [0, n), unbiased.
    std::size_t uniform_index(std::size_t n);
    /// Standard normal (Marsaglia polar method).
    double normal();

private:
    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace alasso
