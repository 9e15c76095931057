#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "repdyn/learning.hpp"

namespace repdyn {

struct Extracted {
  std::uint8_t code = 0;
  bool tie = false;
};

// Reads a learned table as the equivalent action rule: each play state's
// greedy action becomes the corresponding rule bit (ties resolve to defect).
Extracted extract_rule(const QTable& q);

// Same for the judge states; throws std::invalid_argument for tables
// without judge states.
Extracted extract_norm(const QTable& q);

// Tables that encode a given rule / norm exactly (a unit gap between the two
// actions at every state). Used to round-trip the extractors.
QTable table_for_rule(ActionRule rule, bool with_judge_states = false);
QTable table_for(ActionRule rule, SocialNorm norm);

struct PolicyCensus {
  std::array<long, 16> rule_counts{};
  std::array<long, 16> norm_counts{};
  bool has_norms = false;
  // Learners with any tied state. They are still counted under the tie-broken code.
  long unconverged_count = 0;

  long total() const;
  int dominant_rule() const;
  int dominant_norm() const;  // -1 without norms
  double rule_share(int code) const;
  double norm_share(int code) const;

  PolicyCensus& operator+=(const PolicyCensus& other);
  friend bool operator==(const PolicyCensus&, const PolicyCensus&) = default;
};

PolicyCensus take_census(std::span<const QTable> tables);

}  // namespace repdyn
