#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "signet/derangement.hpp"
#include "signet/rng.hpp"

using signet::Derangement;
using signet::DerangementScheme;

TEST_CASE("involution on 4 elements is [2,3,0,1]") {
  const Derangement f = signet::make_involution(2);
  CHECK(f.size() == 4);
  CHECK(f.map(0) == 2);
  CHECK(f.map(1) == 3);
  CHECK(f.map(2) == 0);
  CHECK(f.map(3) == 1);
}

TEST_CASE("involution n=4 maps 0 to 4 and back") {
  const Derangement f = signet::make_involution(4);
  CHECK(f.map(0) == 4);
  CHECK(f.invert(4) == 0);
}

TEST_CASE("involution is self-inverse everywhere") {
  for (int n : {2, 3, 4, 8}) {
    const Derangement f = signet::make_involution(n);
    for (int i = 0; i < 2 * n; ++i) {
      CHECK(f.map(i) != i);
      CHECK(f.map(f.map(i)) == i);
      CHECK(f.invert(f.map(i)) == i);
    }
  }
}

TEST_CASE("random derangement has no fixed points and a consistent inverse") {
  for (std::uint64_t seed : {42ULL, 43ULL, 99ULL}) {
    signet::Rng rng(seed, 0);
    for (int n : {2, 3, 4, 8}) {
      const Derangement f = signet::make_random_derangement(n, rng);
      CHECK(f.size() == 2 * n);
      std::vector<bool> hit(static_cast<std::size_t>(2 * n), false);
      for (int i = 0; i < 2 * n; ++i) {
        const int j = f.map(i);
        CHECK(j != i);                 // exhaustive fixed-point scan
        CHECK(f.invert(j) == i);       // composition check f-inverse(f(i)) = i
        CHECK_FALSE(hit[static_cast<std::size_t>(j)]);  // bijection
        hit[static_cast<std::size_t>(j)] = true;
      }
    }
  }
}

TEST_CASE("random derangement is seed-deterministic") {
  signet::Rng a(42, 0);
  signet::Rng b(42, 0);
  const Derangement fa = signet::make_random_derangement(4, a);
  const Derangement fb = signet::make_random_derangement(4, b);
  for (int i = 0; i < 8; ++i) CHECK(fa.map(i) == fb.map(i));
}

TEST_CASE("constructor rejects malformed mappings") {
  CHECK_THROWS_AS(Derangement(std::vector<int>{0, 1}), std::invalid_argument);  // fixed points
  CHECK_THROWS_AS(Derangement(std::vector<int>{1, 1}), std::invalid_argument);  // not a bijection
  CHECK_THROWS_AS(Derangement(std::vector<int>{1, 2}), std::invalid_argument);  // out of range
  CHECK_THROWS_AS(Derangement(std::vector<int>{}), std::invalid_argument);      // too small
  CHECK_NOTHROW(Derangement(std::vector<int>{1, 0}));
}

TEST_CASE("accessors bounds-check") {
  const Derangement f = signet::make_involution(2);
  CHECK_THROWS_AS(f.map(-1), std::out_of_range);
  CHECK_THROWS_AS(f.map(4), std::out_of_range);
  CHECK_THROWS_AS(f.invert(4), std::out_of_range);
}

TEST_CASE("make_involution rejects degenerate sizes") {
  CHECK_THROWS_AS(signet::make_involution(0), std::invalid_argument);
}

TEST_CASE("scheme factory and name round-trip") {
  signet::Rng rng(42, 0);
  const Derangement inv = signet::make_derangement(3, DerangementScheme::Involution, rng);
  CHECK(inv.map(0) == 3);
  const Derangement rnd = signet::make_derangement(3, DerangementScheme::Random, rng);
  for (int i = 0; i < 6; ++i) CHECK(rnd.map(i) != i);

  CHECK(signet::parse_derangement_scheme("involution") == DerangementScheme::Involution);
  CHECK(signet::parse_derangement_scheme("random") == DerangementScheme::Random);
  CHECK(signet::to_string(DerangementScheme::Involution) == "involution");
  CHECK(signet::to_string(DerangementScheme::Random) == "random");
  CHECK_THROWS_AS(signet::parse_derangement_scheme("bogus"), std::invalid_argument);
}
