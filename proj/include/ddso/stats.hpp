// Deterministic RNG streams and standard-normal primitives.
//
// The generator is SplitMix64: a 64-bit counter advanced by a fixed odd
// increment whose output is a bijective bit-mix of the counter. Streams are
// derived as stream(master, id) = SplitMix64 seeded with
// mix64(master) ^ mix64(id), so distinct ids give unrelated counters and a
// (master, id) pair always replays the same sequence.

#pragma once

#include <cstdint>

namespace ddso {

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double next_unit();

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::uint64_t state_;
};

double norm_pdf(double x);

// Phi(x) = 0.5 * erfc(-x / sqrt(2)); absolute error well below 1e-12.
double norm_cdf(double x);

// Inverse of norm_cdf on (0,1). Rational initial guess (Wichura's PPND16)
// plus one Newton step. Throws std::domain_error outside (0,1).
double norm_quantile(double p);

// Partial expectation E[(Z-d)^+] = phi(d) - d*(1 - Phi(d)) for Z ~ N(0,1).
double normal_loss(double d);

// One draw from N(mu, sigma^2) by inverse-CDF sampling. sigma must be > 0.
double sample_normal(RngStream& rng, double mu, double sigma);

// One draw from Uniform[lo, hi). Requires lo < hi.
double sample_uniform(RngStream& rng, double lo, double hi);

}  // namespace ddso
