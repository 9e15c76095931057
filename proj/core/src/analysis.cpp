#include "repdyn/analysis.hpp"

#include <algorithm>
#include <stdexcept>

namespace repdyn {

namespace {

Extracted extract_block(const QTable& q, StateId first_state) {
  CodeBits bits{};
  bool tie = false;
  for (StateId offset = 0; offset < 4; ++offset) {
    bits[offset] = q.greedy(StateId(first_state + offset));
    tie = tie || q.tied(StateId(first_state + offset));
  }
  return {encode_bits(bits), tie};
}

int argmax(const std::array<long, 16>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace

Extracted extract_rule(const QTable& q) { return extract_block(q, 0); }

Extracted extract_norm(const QTable& q) {
  if (!q.has_judge_states()) throw std::invalid_argument("extract_norm: table has no judge states");
  return extract_block(q, kNumPlayStates);
}

QTable table_for_rule(ActionRule rule, bool with_judge_states) {
  QTable q(with_judge_states);
  const CodeBits bits = decode_bits(rule.code);
  for (StateId s = 0; s < kNumPlayStates; ++s) q.at(s, bits[s]) = 1.0;
  return q;
}

QTable table_for(ActionRule rule, SocialNorm norm) {
  QTable q = table_for_rule(rule, true);
  const CodeBits bits = decode_bits(norm.code);
  for (StateId s = 0; s < 4; ++s) q.at(StateId(kNumPlayStates + s), bits[s]) = 1.0;
  return q;
}

long PolicyCensus::total() const {
  long sum = 0;
  for (long c : rule_counts) sum += c;
  return sum;
}

int PolicyCensus::dominant_rule() const { return argmax(rule_counts); }

int PolicyCensus::dominant_norm() const { return has_norms ? argmax(norm_counts) : -1; }

double PolicyCensus::rule_share(int code) const {
  const long n = total();
  return n == 0 ? 0.0 : static_cast<double>(rule_counts.at(code)) / n;
}

double PolicyCensus::norm_share(int code) const {
  const long n = total();
  return n == 0 || !has_norms ? 0.0 : static_cast<double>(norm_counts.at(code)) / n;
}

PolicyCensus& PolicyCensus::operator+=(const PolicyCensus& other) {
  for (int k = 0; k < 16; ++k) {
    rule_counts[k] += other.rule_counts[k];
    norm_counts[k] += other.norm_counts[k];
  }
  has_norms = has_norms || other.has_norms;
  unconverged_count += other.unconverged_count;
  return *this;
}

PolicyCensus take_census(std::span<const QTable> tables) {
  PolicyCensus census;
  for (const QTable& q : tables) {
    const Extracted rule = extract_rule(q);
    bool tie = rule.tie;
    ++census.rule_counts[rule.code];
    if (q.has_judge_states()) {
      const Extracted norm = extract_norm(q);
      ++census.norm_counts[norm.code];
      census.has_norms = true;
      tie = tie || norm.tie;
    }
    if (tie) ++census.unconverged_count;
  }
  return census;
}

}  // namespace repdyn
