#pragma once

// Exact expected-success oracle used by the tests: walks every random draw
// of an episode (negation identities, meanings, symbol choices, the
// unparseable coin, the receiver's action) and sums the probability of the
// success branches. Written directly from the protocol definitions and kept
// independent of the engine's episode code so the two can check each other.

#include <stdexcept>
#include <vector>

#include "signet/derangement.hpp"
#include "signet/game.hpp"
#include "signet/roth_erev.hpp"

namespace enumeration {

// One agent's policy as plain weight tables (probabilities are weights
// normalized over whatever is selectable in context).
struct PolicyTables {
  std::vector<std::vector<double>> sender;    // state -> decision weights
  std::vector<std::vector<double>> receiver;  // consulted symbol -> action weights
  std::vector<double> negation;               // negation-identity weights
  std::vector<double> meaning;                // ignore/atomic/negation weights
};

inline PolicyTables tables_of(const signet::RothErevAgent& agent) {
  PolicyTables tables;
  const signet::Matrix& sender = agent.sender_matrix();
  for (int r = 0; r < sender.rows(); ++r)
    tables.sender.emplace_back(sender.row(r).begin(), sender.row(r).end());
  const signet::Matrix& receiver = agent.receiver_matrix();
  for (int r = 0; r < receiver.rows(); ++r)
    tables.receiver.emplace_back(receiver.row(r).begin(), receiver.row(r).end());
  tables.negation = agent.negation_weights();
  tables.meaning = agent.meaning_weights();
  return tables;
}

// P(pick | weights restricted to the allowed set). allowed empty = all.
inline double prob_of(const std::vector<double>& weights, const std::vector<char>& allowed,
                      int pick) {
  if (!allowed.empty() && !allowed[static_cast<std::size_t>(pick)]) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (allowed.empty() || allowed[i]) total += weights[i];
  if (total <= 0.0) throw std::runtime_error("enumeration: no selectable weight mass");
  return weights[static_cast<std::size_t>(pick)] / total;
}

inline double expected_success_atomic(const PolicyTables& s, const PolicyTables& r,
                                      const signet::GameConfig& game) {
  double success = 0.0;
  const std::vector<char> all;
  for (int state = 0; state < game.num_states; ++state)
    for (int symbol = 0; symbol < game.num_symbols; ++symbol)
      success += prob_of(s.sender[state], all, symbol) * prob_of(r.receiver[symbol], all, state);
  return success / game.num_states;
}

inline double expected_success_basic(const PolicyTables& s, const PolicyTables& r,
                                     const signet::GameConfig& game,
                                     const signet::Derangement& f) {
  const int n = game.n;
  const std::vector<char> all;
  std::vector<char> first_ok(static_cast<std::size_t>(n) + 1, 1);
  if (!game.allow_negation) first_ok[static_cast<std::size_t>(n)] = 0;
  std::vector<char> second_ok(static_cast<std::size_t>(n) + 1, 1);
  second_ok[static_cast<std::size_t>(n)] = 0;  // the payload is a plain symbol

  double success = 0.0;
  for (int state = 0; state < game.num_states; ++state) {
    const int opposite = f.map(state);
    for (int first = 0; first <= n; ++first) {
      const double p_first = prob_of(s.sender[state], first_ok, first);
      if (p_first == 0.0) continue;
      if (first < n) {
        // Single-symbol message, decoded directly.
        success += p_first * prob_of(r.receiver[first], all, state);
      } else {
        // (negation symbol, m): receiver decodes m and applies f-inverse,
        // so the performed action equals `state` exactly when a = f(state).
        for (int m = 0; m < n; ++m) {
          const double p_m = prob_of(s.sender[opposite], second_ok, m);
          if (p_m == 0.0) continue;
          success += p_first * p_m * prob_of(r.receiver[m], all, opposite);
        }
      }
    }
  }
  return success / game.num_states;
}

inline double expected_success_learned(const PolicyTables& s, const PolicyTables& r,
                                       const signet::GameConfig& game,
                                       const signet::Derangement& f) {
  const int num_symbols = game.num_symbols;  // n+1 concrete symbols
  const int abstract = num_symbols;          // abstract-negation slot
  const std::vector<char> all;

  double success = 0.0;
  for (int phi = 0; phi < num_symbols; ++phi) {
    const double p_phi = prob_of(s.negation, all, phi);
    if (p_phi == 0.0) continue;
    std::vector<char> first_ok(static_cast<std::size_t>(num_symbols) + 1, 1);
    first_ok[static_cast<std::size_t>(phi)] = 0;
    if (!game.allow_negation) first_ok[static_cast<std::size_t>(abstract)] = 0;
    std::vector<char> second_ok(static_cast<std::size_t>(num_symbols) + 1, 1);
    second_ok[static_cast<std::size_t>(phi)] = 0;
    second_ok[static_cast<std::size_t>(abstract)] = 0;

    for (int psi = 0; psi < num_symbols; ++psi) {
      const double p_psi = prob_of(r.negation, all, psi);
      if (p_psi == 0.0) continue;
      const double p_identities = p_phi * p_psi;

      for (int state = 0; state < game.num_states; ++state) {
        const int opposite = f.map(state);
        for (int first = 0; first <= abstract; ++first) {
          const double p_first = prob_of(s.sender[state], first_ok, first);
          if (p_first == 0.0) continue;
          if (first != abstract) {
            success += p_identities * p_first * prob_of(r.receiver[first], all, state);
            continue;
          }
          for (int m = 0; m < num_symbols; ++m) {
            const double p_m = prob_of(s.sender[opposite], second_ok, m);
            if (p_m == 0.0) continue;
            const double p_branch = p_identities * p_first * p_m;
            double p_win;
            if (psi == phi) {
              p_win = prob_of(r.receiver[m], all, opposite);  // decode m, invert
            } else if (psi == m) {
              p_win = prob_of(r.receiver[phi], all, opposite);  // decode phi, invert
            } else {
              // Unparseable: fair coin, decode directly.
              p_win = 0.5 * prob_of(r.receiver[phi], all, state) +
                      0.5 * prob_of(r.receiver[m], all, state);
            }
            success += p_branch * p_win;
          }
        }
      }
    }
  }
  return success / game.num_states;
}

inline double expected_success_combined(const PolicyTables& s, const PolicyTables& r,
                                        const signet::GameConfig& game,
                                        const signet::Derangement& f) {
  const int num_symbols = game.num_symbols;
  const int abstract = num_symbols;
  const std::vector<char> all;
  constexpr int kIgnore = 0, kAtomic = 1, kNegation = 2;

  double success = 0.0;
  for (int phi = 0; phi < num_symbols; ++phi) {
    const double p_phi = prob_of(s.negation, all, phi);
    if (p_phi == 0.0) continue;
    for (int psi = 0; psi < num_symbols; ++psi) {
      const double p_psi = prob_of(r.negation, all, psi);
      if (p_psi == 0.0) continue;
      for (int ms = 0; ms < 3; ++ms) {
        const double p_ms = prob_of(s.meaning, all, ms);
        if (p_ms == 0.0) continue;
        for (int mr = 0; mr < 3; ++mr) {
          const double p_mr = prob_of(r.meaning, all, mr);
          if (p_mr == 0.0) continue;
          const double p_context = p_phi * p_psi * p_ms * p_mr;

          std::vector<char> first_ok(static_cast<std::size_t>(num_symbols) + 1, 1);
          if (ms == kNegation) {
            first_ok[static_cast<std::size_t>(phi)] = 0;
            if (!game.allow_negation) first_ok[static_cast<std::size_t>(abstract)] = 0;
          } else {
            // Ignore/atomic senders treat every concrete symbol as atomic
            // and never take the abstract-negation branch.
            first_ok[static_cast<std::size_t>(abstract)] = 0;
          }
          std::vector<char> second_ok(static_cast<std::size_t>(num_symbols) + 1, 1);
          second_ok[static_cast<std::size_t>(phi)] = 0;
          second_ok[static_cast<std::size_t>(abstract)] = 0;

          for (int state = 0; state < game.num_states; ++state) {
            const int opposite = f.map(state);
            for (int first = 0; first <= abstract; ++first) {
              const double p_first = prob_of(s.sender[state], first_ok, first);
              if (p_first == 0.0) continue;
              if (first != abstract) {
                // Single-symbol messages are decoded directly whatever the
                // receiver's meaning.
                success +=
                    p_context * p_first * prob_of(r.receiver[first], all, state);
                continue;
              }
              for (int m = 0; m < num_symbols; ++m) {
                const double p_m = prob_of(s.sender[opposite], second_ok, m);
                if (p_m == 0.0) continue;
                const double p_branch = p_context * p_first * p_m;
                double p_win;
                if (psi == phi || psi == m) {
                  const int other = (psi == phi) ? m : phi;
                  if (mr == kIgnore) {
                    p_win = prob_of(r.receiver[other], all, state);
                  } else if (mr == kAtomic) {
                    p_win = prob_of(r.receiver[psi], all, state);
                  } else {
                    p_win = prob_of(r.receiver[other], all, opposite);
                  }
                } else {
                  p_win = 0.5 * prob_of(r.receiver[phi], all, state) +
                          0.5 * prob_of(r.receiver[m], all, state);
                }
                success += p_branch * p_win;
              }
            }
          }
        }
      }
    }
  }
  return success / game.num_states;
}

inline double expected_success(const PolicyTables& s, const PolicyTables& r,
                               const signet::GameConfig& game, const signet::Derangement* f) {
  switch (game.kind) {
    case signet::GameKind::Atomic:
      return expected_success_atomic(s, r, game);
    case signet::GameKind::BasicNegation:
      return expected_success_basic(s, r, game, *f);
    case signet::GameKind::LearnedNegation:
      return expected_success_learned(s, r, game, *f);
    case signet::GameKind::CombinedNegation:
      return expected_success_combined(s, r, game, *f);
  }
  throw std::logic_error("enumeration: unknown game kind");
}

inline double expected_success(const signet::RothErevAgent& sender,
                               const signet::RothErevAgent& receiver,
                               const signet::GameConfig& game, const signet::Derangement* f) {
  return expected_success(tables_of(sender), tables_of(receiver), game, f);
}

}  // namespace enumeration
