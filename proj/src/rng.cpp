#include "cflab/rng.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

namespace cflab::rng {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component, std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ fnv1a(component)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

Stream::Stream(std::uint64_t seed, std::string_view component, std::uint64_t index)
    : engine_(derive_seed(seed, component, index)) {}

double Stream::uniform() {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementation.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Stream::normal() {
  // Box-Muller on our own uniforms keeps streams portable across libraries.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

qcore::Complex Stream::complex_normal() { return {normal(), normal()}; }

qcore::Vector haar_vector(int dim, Stream& rng) {
  qcore::Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return v / v.norm();
}

qcore::QuantumState haar_state(const qcore::Layout& layout, Stream& rng) {
  int d = 1;
  for (const auto& s : layout) d *= s.dim;
  return qcore::QuantumState::pure(layout, haar_vector(d, rng));
}

qcore::QuantumState random_mixed_state(const qcore::Layout& layout, Stream& rng, int rank) {
  int d = 1;
  for (const auto& s : layout) d *= s.dim;
  const int r = rank <= 0 ? d : rank;
  qcore::Matrix g(d, r);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = rng.complex_normal();
  qcore::Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return qcore::QuantumState::mixed(layout, std::move(rho));
}

qcore::Matrix haar_unitary(int dim, Stream& rng) {
  qcore::Matrix g(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<qcore::Matrix> qr(g);
  qcore::Matrix q = qr.householderQ();
  const qcore::Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column phases so the distribution is exactly Haar.
  for (int j = 0; j < dim; ++j) {
    const auto rjj = r(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) q.col(j) *= rjj / mag;
  }
  return q;
}

namespace {

// Splits the first `dim` columns of a (dim*n) x (dim*n) unitary into n
// stacked dim x dim blocks forming an isometry.
std::vector<qcore::Matrix> isometry_blocks(int dim, int n, Stream& rng) {
  const qcore::Matrix u = haar_unitary(dim * n, rng);
  std::vector<qcore::Matrix> blocks;
  blocks.reserve(n);
  for (int k = 0; k < n; ++k) blocks.push_back(u.block(k * dim, 0, dim, dim));
  return blocks;
}

}  // namespace

qcore::Channel random_channel(int dim, int n_kraus, Stream& rng) {
  return qcore::Channel(isometry_blocks(dim, n_kraus, rng));
}

qcore::Instrument random_instrument(int dim, int n_outcomes, int kraus_per_outcome, Stream& rng) {
  auto blocks = isometry_blocks(dim, n_outcomes * kraus_per_outcome, rng);
  std::vector<qcore::InstrumentOutcome> outcomes;
  for (int o = 0; o < n_outcomes; ++o) {
    qcore::InstrumentOutcome out{"o" + std::to_string(o), {}};
    for (int k = 0; k < kraus_per_outcome; ++k) out.kraus.push_back(blocks[o * kraus_per_outcome + k]);
    outcomes.push_back(std::move(out));
  }
  return qcore::Instrument(std::move(outcomes));
}

}  // namespace cflab::rng
