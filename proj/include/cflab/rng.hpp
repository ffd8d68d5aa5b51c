#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "cflab/qcore.hpp"

namespace cflab::rng {

// Deterministic stream keyed by (seed, component, index). Streams for
// different components or indices never share state, so adding a sweep point
// or probe leaves every other stream untouched.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view component, std::uint64_t index = 0);

  double uniform();  // [0, 1)
  double normal();   // standard normal
  qcore::Complex complex_normal();
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t index);

qcore::Vector haar_vector(int dim, Stream& rng);
qcore::QuantumState haar_state(const qcore::Layout& layout, Stream& rng);
// Ginibre-induced mixed state of the given rank (rank <= 0 means full rank).
qcore::QuantumState random_mixed_state(const qcore::Layout& layout, Stream& rng, int rank = 0);
qcore::Matrix haar_unitary(int dim, Stream& rng);
// Random CPTP map with `n_kraus` operators from a Haar isometry.
qcore::Channel random_channel(int dim, int n_kraus, Stream& rng);
// Random instrument: `n_outcomes` outcomes, `kraus_per_outcome` operators each.
qcore::Instrument random_instrument(int dim, int n_outcomes, int kraus_per_outcome, Stream& rng);

}  // namespace cflab::rng
