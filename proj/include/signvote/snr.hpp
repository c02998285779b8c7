#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace signvote {

// 2/sqrt(3), the SNR separating the two tail regimes.
inline constexpr double kCriticalSnr = 1.1547005383792515;

// Per-coordinate signal-to-noise ratios S_i = |g_i|/sigma_i together with the
// high-SNR index set H = { i : S_i > 2/sqrt(3) } (strict inequality). A
// coordinate with sigma_i = 0 and g_i != 0 has infinite SNR and lands in H;
// g_i = 0 gives S_i = 0 regardless of sigma_i.
struct SnrProfile {
  std::vector<double> snr;
  std::vector<std::uint8_t> high;  // 0/1 membership flags
  std::uint32_t high_count = 0;
};

inline SnrProfile snr_profile(std::span<const double> g, std::span<const double> sigma) {
  if (g.size() != sigma.size())
    throw std::invalid_argument("snr_profile: dimension mismatch");
  SnrProfile p;
  p.snr.resize(g.size());
  p.high.assign(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = std::abs(g[i]);
    if (a == 0.0) {
      p.snr[i] = 0.0;
    } else if (sigma[i] == 0.0) {
      p.snr[i] = std::numeric_limits<double>::infinity();
    } else {
      p.snr[i] = a / sigma[i];
    }
    if (p.snr[i] > kCriticalSnr) {
      p.high[i] = 1;
      ++p.high_count;
    }
  }
  return p;
}

}  // namespace signvote
