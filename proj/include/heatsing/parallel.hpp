#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <vector>

namespace heatsing {

/// Every data-parallel kernel in the library has a serial reference path.
/// Both paths produce bit-identical results: work is split into fixed
/// chunks whose partial results are combined in chunk order.
enum class Execution { serial, parallel };

/// Samples handled by one RNG stream / one reduction chunk.
inline constexpr std::size_t kChunkSize = 4096;

void set_thread_count(int threads);
int thread_count();

/// Seed for the RNG stream owned by one chunk of a Monte Carlo run.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) { return Rng(stream_seed(seed, stream)); }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Calls body(i) for i in [0, n).
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
    if (exec == Execution::serial) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const auto count = static_cast<std::int64_t>(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
#pragma omp critical(heatsing_for_each_index)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Evaluates chunk(c) -> Partial for every chunk and returns the partials
/// in chunk order, so the caller's fold is independent of the thread count.
template <class Partial, class ChunkFn>
std::vector<Partial> map_chunks(std::size_t chunks, Execution exec, ChunkFn&& chunk) {
    std::vector<Partial> out(chunks);
    for_each_index(chunks, exec, [&](std::size_t c) { out[c] = chunk(c); });
    return out;
}

inline std::size_t chunk_count(std::size_t samples) { return (samples + kChunkSize - 1) / kChunkSize; }

}  // namespace heatsing
