#pragma once

// Prisoner's Dilemma payoffs, 4-bit action rules and social norms, and noisy
// reputation assignment. Every other module goes through these codecs for bit
// math.

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace repdyn {

using Rng = std::mt19937_64;

enum class Action : std::uint8_t { Defect = 0, Cooperate = 1 };

// Binary label; 1 is informally "good" and 0 "bad", but no meaning is attached.
enum class Reputation : std::uint8_t { Bad = 0, Good = 1 };

constexpr int to_int(Action a) { return static_cast<int>(a); }
constexpr int to_int(Reputation r) { return static_cast<int>(r); }
constexpr Action action_from(int bit) { return bit ? Action::Cooperate : Action::Defect; }
constexpr Reputation reputation_from(int bit) { return bit ? Reputation::Good : Reputation::Bad; }
constexpr Reputation flip(Reputation r) { return r == Reputation::Good ? Reputation::Bad : Reputation::Good; }
constexpr Action flip(Action a) { return a == Action::Cooperate ? Action::Defect : Action::Cooperate; }

// Position of the bit selected by a (row, column) input pair: the leftmost
// column of the code tables, (0, 0), is bit 3 and (1, 1) is bit 0.
constexpr int code_bit_position(int first, int second) { return 3 - (2 * first + second); }

constexpr int code_bit(std::uint8_t code, int first, int second) {
  return (code >> code_bit_position(first, second)) & 1;
}

// Bits listed in table order: (0,0), (0,1), (1,0), (1,1).
using CodeBits = std::array<int, 4>;

constexpr CodeBits decode_bits(std::uint8_t code) {
  return {code_bit(code, 0, 0), code_bit(code, 0, 1), code_bit(code, 1, 0), code_bit(code, 1, 1)};
}

constexpr std::uint8_t encode_bits(const CodeBits& bits) {
  std::uint8_t code = 0;
  for (int first = 0; first < 2; ++first) {
    for (int second = 0; second < 2; ++second) {
      if (bits[2 * first + second]) code |= std::uint8_t(1u << code_bit_position(first, second));
    }
  }
  return code;
}

inline std::uint8_t checked_code(int code, const char* what) {
  if (code < 0 || code > 15) {
    throw std::invalid_argument(std::string(what) + " code must be in [0, 15], got " + std::to_string(code));
  }
  return static_cast<std::uint8_t>(code);
}

// Maps (own reputation, opponent reputation) to an action.
struct ActionRule {
  std::uint8_t code = 0;

  constexpr ActionRule() = default;
  explicit ActionRule(int c) : code(checked_code(c, "action rule")) {}

  constexpr Action act(Reputation own, Reputation opp) const {
    return action_from(code_bit(code, to_int(own), to_int(opp)));
  }

  friend constexpr bool operator==(ActionRule, ActionRule) = default;
};

// Maps (focal action, opponent reputation) to the focal agent's new reputation.
struct SocialNorm {
  std::uint8_t code = 0;

  constexpr SocialNorm() = default;
  explicit SocialNorm(int c) : code(checked_code(c, "social norm")) {}

  constexpr Reputation judge(Action focal, Reputation opp) const {
    return reputation_from(code_bit(code, to_int(focal), to_int(opp)));
  }

  friend constexpr bool operator==(SocialNorm, SocialNorm) = default;
};

struct PayoffParams {
  double b = 5.0;
  double c = 1.0;

  // Throws std::invalid_argument unless b > c > 0.
  void validate() const;
  double mutual_cooperation() const { return b - c; }

  friend bool operator==(const PayoffParams&, const PayoffParams&) = default;
};

// Row player's payoff: (D,D) -> 0, (D,C) -> b, (C,D) -> -c, (C,C) -> b - c.
constexpr double payoff(Action own, Action opp, const PayoffParams& params) {
  return (opp == Action::Cooperate ? params.b : 0.0) - (own == Action::Cooperate ? params.c : 0.0);
}

constexpr Action rule_action(ActionRule rule, Reputation own, Reputation opp) { return rule.act(own, opp); }

constexpr Reputation norm_judgment(SocialNorm norm, Action focal, Reputation opp) {
  return norm.judge(focal, opp);
}

// Throws std::invalid_argument unless 0 <= chi < 0.5.
void validate_assignment_error(double chi);

// Flips `intended` with probability chi. Always consumes exactly one uniform draw.
Reputation assign_with_error(Reputation intended, double chi, Rng& rng);

double uniform01(Rng& rng);

// Uniform integer in [0, n) by multiply-shift; n must be positive.
inline std::size_t uniform_below(Rng& rng, std::size_t n) {
  __extension__ using u128 = unsigned __int128;
  return static_cast<std::size_t>((static_cast<u128>(rng()) * n) >> 64);
}

}  // namespace repdyn
