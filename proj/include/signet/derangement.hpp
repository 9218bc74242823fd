#pragma once

#include <string>
#include <vector>

#include "signet/rng.hpp"

namespace signet {

// How the fixed-point-free bijection over states is constructed.
enum class DerangementScheme { Involution, Random };

// A fixed-point-free bijection f on the state set {0, ..., 2n-1} together
// with its inverse. Negation maps a state to f(state); decoding an action
// produced under negation goes through invert().
class Derangement {
 public:
  Derangement() = default;
  explicit Derangement(std::vector<int> forward);

  int size() const { return static_cast<int>(forward_.size()); }

  int map(int state) const;
  int invert(int action) const;

  const std::vector<int>& forward() const { return forward_; }

 private:
  std::vector<int> forward_;
  std::vector<int> inverse_;
};

// Deterministic involution: f(i) = (i + n) mod 2n. Self-inverse, so encode
// and decode run through the same table.
Derangement make_involution(int n);

// Uniformly random derangement over {0..2n-1}, found by shuffling until no
// fixed point remains (expected ~e attempts, independent of size).
Derangement make_random_derangement(int n, Rng& rng);

Derangement make_derangement(int n, DerangementScheme scheme, Rng& rng);

DerangementScheme parse_derangement_scheme(const std::string& name);
std::string to_string(DerangementScheme scheme);

}  // namespace signet
