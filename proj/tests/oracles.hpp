#pragma once

// Reference implementations shared by the unit tests and the acceptance run.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "csisense/csi.hpp"

namespace oracles {

using csisense::Complex;
using csisense::CsiFrame;

using LD = long double;

// Brute-force long-double reference implementations.
inline LD o_mean(const std::vector<double>& x) {
  LD s = 0;
  for (double v : x) s += v;
  return s / x.size();
}
inline LD o_moment(const std::vector<double>& x, int k) {
  const LD mu = o_mean(x);
  LD s = 0;
  for (double v : x) s += std::pow(static_cast<LD>(v) - mu, k);
  return s / x.size();
}
inline LD o_std(const std::vector<double>& x) { return std::sqrt(o_moment(x, 2)); }
inline LD o_mad(const std::vector<double>& x) {
  const LD mu = o_mean(x);
  LD s = 0;
  for (double v : x) s += std::fabs(static_cast<LD>(v) - mu);
  return s / x.size();
}
inline LD o_skew(const std::vector<double>& x) {
  const LD r = o_std(x);
  return r == 0 ? 0 : o_moment(x, 3) / (r * r * r);
}
inline LD o_kurt(const std::vector<double>& x) {
  const LD r = o_std(x);
  return r == 0 ? 0 : o_moment(x, 4) / (r * r * r * r);
}
inline LD o_entropy(const std::vector<double>& x, std::size_t bins) {
  const LD lo = *std::min_element(x.begin(), x.end()), hi = *std::max_element(x.begin(), x.end());
  if (hi == lo) return 0;
  std::vector<std::size_t> c(bins, 0);
  for (double v : x) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) * bins / (hi - lo)));
    ++c[std::min(b, bins - 1)];
  }
  LD h = 0;
  for (auto k : c)
    if (k) h -= (static_cast<LD>(k) / x.size()) * std::log2(static_cast<LD>(k) / x.size());
  return h;
}
inline LD o_velocity(const std::vector<double>& x) {
  std::vector<double> d;
  for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
  return o_std(d);
}
inline LD o_median(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : (static_cast<LD>(x[n / 2 - 1]) + x[n / 2]) / 2;
}

inline std::vector<double> random_sequence(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(2, 600), kind(0, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::exponential_distribution<double> ex(1.0);
  const int n = len(rng), k = kind(rng);
  const double offset = 30.0 * u(rng), scale = std::pow(10.0, 2.0 * u(rng));
  std::vector<double> x(n);
  for (auto& v : x) {
    const double r = k == 0 ? gauss(rng) : k == 1 ? u(rng) : k == 2 ? ex(rng) : std::sin(3.0 * u(rng)) + 0.1 * gauss(rng);
    v = offset + scale * r;
  }
  return x;
}

struct RawCsi {
  std::size_t n_rx, n_tx;
  std::uint8_t antenna_sel;
  // values[sc][rx][tx] = (re, im), indexed by physical rx chain
  std::vector<std::pair<int, int>> values;
  std::pair<int, int>& at(std::size_t sc, std::size_t rx, std::size_t tx) {
    return values[(sc * n_rx + rx) * n_tx + tx];
  }
};

// Reference packer: lays the payload out as an explicit bit list and packs
// it into bytes afterwards, independently of the library's cursor arithmetic.
inline std::vector<std::uint8_t> oracle_log_record(RawCsi& c, std::uint32_t ts) {
  std::vector<bool> bits;
  auto push8 = [&](int v) {
    const auto u = static_cast<std::uint8_t>(static_cast<std::int8_t>(v));
    for (int b = 0; b < 8; ++b) bits.push_back((u >> b) & 1);
  };
  int perm[3] = {c.antenna_sel & 3, (c.antenna_sel >> 2) & 3, (c.antenna_sel >> 4) & 3};
  for (std::size_t sc = 0; sc < 30; ++sc) {
    bits.insert(bits.end(), 3, false);
    for (std::size_t r = 0; r < c.n_rx; ++r)
      for (std::size_t t = 0; t < c.n_tx; ++t) {
        auto [re, im] = c.at(sc, static_cast<std::size_t>(perm[r]), t);
        push8(re);
        push8(im);
      }
  }
  std::vector<std::uint8_t> payload((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) payload[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));

  std::vector<std::uint8_t> body = {
      static_cast<std::uint8_t>(ts), static_cast<std::uint8_t>(ts >> 8), static_cast<std::uint8_t>(ts >> 16),
      static_cast<std::uint8_t>(ts >> 24), 7, 0, 0, 0, static_cast<std::uint8_t>(c.n_rx),
      static_cast<std::uint8_t>(c.n_tx), 40, 41, 42, static_cast<std::uint8_t>(-92), 30, c.antenna_sel,
      static_cast<std::uint8_t>(payload.size()), static_cast<std::uint8_t>(payload.size() >> 8), 0x01, 0x41};
  const std::size_t size = body.size() + payload.size() + 1;
  std::vector<std::uint8_t> out = {static_cast<std::uint8_t>(size >> 8), static_cast<std::uint8_t>(size), 0xBB};
  for (auto b : body) out.push_back(b);
  for (auto b : payload) out.push_back(b);
  return out;
}

inline std::uint8_t random_sel(std::mt19937_64& rng, std::size_t n_rx) {
  std::vector<int> p(n_rx);
  for (std::size_t i = 0; i < n_rx; ++i) p[i] = static_cast<int>(i);
  std::shuffle(p.begin(), p.end(), rng);
  std::uint8_t sel = 0;
  for (std::size_t i = 0; i < n_rx; ++i) sel |= static_cast<std::uint8_t>(p[i] << (2 * i));
  return sel;
}

inline RawCsi random_csi(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> ant(1, 3), val(-128, 127);
  RawCsi c;
  c.n_rx = static_cast<std::size_t>(ant(rng));
  c.n_tx = static_cast<std::size_t>(ant(rng));
  c.antenna_sel = random_sel(rng, c.n_rx);
  c.values.resize(30 * c.n_rx * c.n_tx);
  for (auto& v : c.values) v = {val(rng), val(rng)};
  return c;
}

inline CsiFrame to_frame(RawCsi& c, double t) {
  CsiFrame f(t, 30, c.n_rx, c.n_tx);
  for (std::size_t sc = 0; sc < 30; ++sc)
    for (std::size_t r = 0; r < c.n_rx; ++r)
      for (std::size_t x = 0; x < c.n_tx; ++x) {
        auto [re, im] = c.at(sc, r, x);
        f.set(sc, r, x, Complex(re, im));
      }
  return f;
}

}  // namespace oracles
