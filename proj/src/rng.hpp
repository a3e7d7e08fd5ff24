#pragma once

#include <cstdint>
#include <random>

namespace jdfm {

// Mixes a master seed with a stream index into an engine seed.  Distinct
// streams (chains, subjects, replicates) get decorrelated engines while the
// whole run stays reproducible from one master seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

// Deterministic random source: a fixed engine plus hand-rolled distribution
// transforms, so sequences are identical across platforms and standard
// library versions (std::normal_distribution and friends are not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns an exact endpoint.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  uint64_t integer(uint64_t n);

  int bernoulli(double p);

  // Standard normal via Marsaglia's polar method with spare caching.
  double normal();
  double normal(double mean, double sd);

  double exponential(double rate = 1.0);

  // Gamma with shape/rate parameterization (mean = shape / rate), using
  // Marsaglia-Tsang squeeze; shapes below one are boosted via U^(1/shape).
  double gamma(double shape, double rate);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace jdfm
