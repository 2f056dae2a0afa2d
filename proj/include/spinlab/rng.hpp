#pragma once

#include <cstdint>

namespace spinlab {

// Counter-based splittable generator. A stream is fully determined by
// (master seed, stream id, purpose tag), so parallel chains draw from
// disjoint reproducible sequences regardless of scheduling.
class CounterRng {
public:
    CounterRng() : CounterRng(0, 0, 0) {}
    CounterRng(uint64_t master_seed, uint64_t stream, uint64_t purpose = 0);

    uint64_t next_u64();
    // Uniform in [0, 1) with 53 random bits.
    double next_double();
    // Uniform in {0, ..., bound-1}; bound >= 1.
    uint64_t next_below(uint64_t bound);
    bool next_bernoulli(double p) { return next_double() < p; }
    // Standard normal via inverse CDF (keeps the stream strictly counter-driven).
    double next_gaussian();

    uint64_t state() const { return counter_; }

private:
    uint64_t key_ = 0;
    uint64_t counter_ = 0;
};

}  // namespace spinlab
