#include "signet/derangement.hpp"

#include <numeric>
#include <stdexcept>

namespace signet {

Derangement::Derangement(std::vector<int> forward) : forward_(std::move(forward)) {
  const int size = static_cast<int>(forward_.size());
  if (size < 2) throw std::invalid_argument("derangement needs at least 2 states");
  inverse_.assign(size, -1);
  for (int i = 0; i < size; ++i) {
    const int j = forward_[i];
    if (j < 0 || j >= size) throw std::invalid_argument("derangement image out of range");
    if (j == i) throw std::invalid_argument("derangement has a fixed point");
    if (inverse_[j] != -1) throw std::invalid_argument("derangement is not a bijection");
    inverse_[j] = i;
  }
}

int Derangement::map(int state) const {
  if (state < 0 || state >= size()) throw std::out_of_range("Derangement::map: state out of range");
  return forward_[state];
}

int Derangement::invert(int action) const {
  if (action < 0 || action >= size()) throw std::out_of_range("Derangement::invert: action out of range");
  return inverse_[action];
}

Derangement make_involution(int n) {
  if (n < 1) throw std::invalid_argument("make_involution: n must be positive");
  std::vector<int> forward(2 * n);
  for (int i = 0; i < 2 * n; ++i) forward[i] = (i + n) % (2 * n);
  return Derangement(std::move(forward));
}

Derangement make_random_derangement(int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("make_random_derangement: n must be positive");
  std::vector<int> forward(2 * n);
  for (;;) {
    std::iota(forward.begin(), forward.end(), 0);
    rng.shuffle(std::span<int>(forward));
    bool has_fixed_point = false;
    for (int i = 0; i < 2 * n; ++i) {
      if (forward[i] == i) {
        has_fixed_point = true;
        break;
      }
    }
    // Rejection keeps the distribution uniform over derangements; the accept
    // probability tends to 1/e, so retries stay cheap at any size.
    if (!has_fixed_point) return Derangement(forward);
  }
}

Derangement make_derangement(int n, DerangementScheme scheme, Rng& rng) {
  switch (scheme) {
    case DerangementScheme::Involution: return make_involution(n);
    case DerangementScheme::Random: return make_random_derangement(n, rng);
  }
  throw std::logic_error("make_derangement: unknown scheme");
}

DerangementScheme parse_derangement_scheme(const std::string& name) {
  if (name == "involution") return DerangementScheme::Involution;
  if (name == "random") return DerangementScheme::Random;
  throw std::invalid_argument("unknown derangement scheme: " + name);
}

std::string to_string(DerangementScheme scheme) {
  return scheme == DerangementScheme::Involution ? "involution" : "random";
}

}  // namespace signet
