#pragma once

// Independent reference computations for frozen golden values. Nothing here
// calls the library: qubit registers are plain amplitude vectors indexed with
// bit 0 as the most significant qubit, gates are applied by index loops.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace ref {

using cd = std::complex<double>;
using Gate1 = std::array<cd, 4>;  // row-major 2x2

inline const double kRt = 1.0 / std::sqrt(2.0);
inline const Gate1 kH{kRt, kRt, kRt, -kRt};
inline const Gate1 kX{0, 1, 1, 0};
inline const Gate1 kY{0, cd(0, -1), cd(0, 1), 0};
inline const Gate1 kZ{1, 0, 0, -1};
inline const Gate1 kSdg{1, 0, 0, cd(0, -1)};

struct Register {
  int n;
  std::vector<cd> amp;

  explicit Register(int qubits) : n(qubits), amp(std::size_t{1} << qubits, 0.0) { amp[0] = 1.0; }

  std::size_t bit(int q) const { return std::size_t{1} << (n - 1 - q); }

  void apply(const Gate1& g, int q) {
    const std::size_t m = bit(q);
    for (std::size_t i = 0; i < amp.size(); ++i) {
      if (i & m) continue;
      const cd a = amp[i], b = amp[i | m];
      amp[i] = g[0] * a + g[1] * b;
      amp[i | m] = g[2] * a + g[3] * b;
    }
  }
  void cnot(int c, int t) {
    for (std::size_t i = 0; i < amp.size(); ++i) {
      if ((i & bit(c)) && !(i & bit(t))) std::swap(amp[i], amp[i | bit(t)]);
    }
  }
  void cz(int a, int b) {
    for (std::size_t i = 0; i < amp.size(); ++i) {
      if ((i & bit(a)) && (i & bit(b))) amp[i] = -amp[i];
    }
  }
  // Ideal gadget on (bomb, mediator, flag), mediator and flag starting in |0>.
  void gadget(int b, int s, int w) {
    apply(kH, s);
    cz(b, s);
    apply(kH, s);
    cnot(b, w);
  }
  double prob(std::size_t mask, std::size_t value) const {
    double p = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) {
      if ((i & mask) == value) p += std::norm(amp[i]);
    }
    return p;
  }
};

// CLF direct wiring on C, C_A, C_B, S_A, W_A, S_B, W_B. The coin copy into
// C_B is read in the X basis by lab B.
struct ClfNumbers {
  double p_dark_dark;
  double p_coin0_given_bA1;  // chain A claim C = 0
  double p_coin1_given_bB1;  // chain B claim C = 1
};

inline ClfNumbers clf_direct() {
  Register r(7);
  r.apply(kH, 0);
  r.cnot(0, 1);
  r.cnot(0, 2);
  r.apply(kH, 2);
  r.gadget(1, 3, 4);
  r.apply(kH, 2);  // lab B sees its bomb in the X basis
  r.gadget(2, 5, 6);
  r.apply(kH, 2);
  const std::size_t dd = r.bit(4) | r.bit(6);
  const double p = r.prob(dd, dd);
  // In the dark-dark event b_A = C_A; b_B is C_B in the X basis, which the
  // final H maps back to the Z digit of the C_B register after undoing it.
  Register x = r;
  x.apply(kH, 2);
  const double ba1 = r.prob(dd | r.bit(1), dd | r.bit(1));
  const double ba1_c0 = r.prob(dd | r.bit(1) | r.bit(0), dd | r.bit(1));
  const double bb1 = x.prob(dd | x.bit(2), dd | x.bit(2));
  const double bb1_c1 = x.prob(dd | x.bit(2) | x.bit(0), dd | x.bit(2) | x.bit(0));
  return {p, ba1_c0 / ba1, bb1_c1 / bb1};
}

inline double abl(const std::array<double, 3>& pre, const std::array<double, 3>& post, int level) {
  double in = 0.0, out = 0.0;
  for (int k = 0; k < 3; ++k) (k == level ? in : out) += post[k] * pre[k];
  return in * in / (in * in + out * out);
}

// <P1 P2 P3> on (|000> + e^{i phase}|111>)/sqrt2.
inline double ghz_parity(double phase, const std::array<Gate1, 3>& paulis) {
  Register r(3);
  r.amp[0] = kRt;
  r.amp[7] = kRt * std::polar(1.0, phase);
  Register s = r;
  for (int q = 0; q < 3; ++q) s.apply(paulis[static_cast<std::size_t>(q)], q);
  cd e = 0.0;
  for (std::size_t i = 0; i < 8; ++i) e += std::conj(r.amp[i]) * s.amp[i];
  return e.real();
}

// Two-amplitude Zeno recursion for a live bomb: rotate, absorb the probed
// arm, pass the rest with a pi phase.
struct ZenoNumbers {
  double dark, bright, dose;
};

inline ZenoNumbers zeno_live(int n, double eta) {
  const double th = M_PI / (2.0 * n);
  double f = 1.0, p = 0.0, dose = 0.0;
  for (int k = 0; k < n; ++k) {
    const double f2 = std::cos(th) * f - std::sin(th) * p;
    const double p2 = std::sin(th) * f + std::cos(th) * p;
    dose += eta * p2 * p2;
    f = f2;
    p = -std::sqrt(1.0 - eta) * p2;
  }
  return {f * f, p * p, dose};
}

// max over +-1 trajectories of q1 q2 + q2 q3 - q1 q3.
inline int lg_deterministic_max() {
  int best = -4;
  for (int m = 0; m < 8; ++m) {
    const int q1 = (m & 4) ? -1 : 1, q2 = (m & 2) ? -1 : 1, q3 = (m & 1) ? -1 : 1;
    best = std::max(best, q1 * q2 + q2 * q3 - q1 * q3);
  }
  return best;
}

}  // namespace ref
