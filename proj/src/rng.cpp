#include "spinlab/rng.hpp"

#include <stdexcept>

#include "spinlab/logspace.hpp"

namespace spinlab {

namespace {
constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer; statistically solid as a counter mixer.
inline uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace

CounterRng::CounterRng(uint64_t master_seed, uint64_t stream, uint64_t purpose) {
    key_ = mix64(master_seed + kGolden);
    key_ = mix64(key_ ^ (stream + kGolden));
    key_ = mix64(key_ ^ (purpose + 0xD1B54A32D192ED03ULL));
    counter_ = 0;
}

uint64_t CounterRng::next_u64() {
    counter_ += 1;
    return mix64(key_ + counter_ * kGolden);
}

double CounterRng::next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

uint64_t CounterRng::next_below(uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    // Multiply-shift; bias < 2^-64 * bound, negligible for simulation use.
    return static_cast<uint64_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
}

double CounterRng::next_gaussian() {
    // Map to (0,1) strictly; a zero draw is nudged to the smallest representable cell.
    double u = (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    return inverse_normal_cdf(u);
}

}  // namespace spinlab
