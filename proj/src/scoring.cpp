#include "vtask/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "vtask/error.hpp"

namespace vtask::scoring {

void validate(const StepDistribution& step) {
  double sum = 0.0;
  for (double p : step.probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DomainError("probability " + std::to_string(p) + " is negative or not finite");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw DomainError("probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

double sequence_nll(std::span<const StepDistribution> steps, const TargetSequence& target) {
  if (steps.size() != target.ids.size()) {
    throw DomainError("sequence has " + std::to_string(target.ids.size()) + " targets but " +
                      std::to_string(steps.size()) + " step distributions");
  }
  double nll = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    validate(steps[i]);
    const std::size_t id = target.ids[i];
    if (id >= steps[i].probs.size()) {
      throw DomainError("target id " + std::to_string(id) + " at step " + std::to_string(i) +
                        " exceeds vocabulary size " + std::to_string(steps[i].probs.size()));
    }
    const double p = steps[i].probs[id];
    if (p == 0.0) return std::numeric_limits<double>::infinity();
    nll -= std::log(p);
  }
  return nll;
}

namespace {

std::map<std::string, long> bag_of_words(std::string_view text) {
  std::map<std::string, long> counts;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) ++counts[word];
    word.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return counts;
}

}  // namespace

double text_similarity(std::string_view a, std::string_view b) {
  const auto va = bag_of_words(a);
  const auto vb = bag_of_words(b);
  if (va.empty() || vb.empty()) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [w, c] : va) {
    na += static_cast<double>(c) * c;
    if (auto it = vb.find(w); it != vb.end()) dot += static_cast<double>(c) * it->second;
  }
  for (const auto& [w, c] : vb) nb += static_cast<double>(c) * c;
  // sqrt of the product keeps a == b exact: sqrt(na * na) == na for integral na.
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

std::size_t select_best(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw DomainError("select_best needs at least one candidate");
  const bool all_scored = std::all_of(candidates.begin(), candidates.end(),
                                      [](const Candidate& c) { return c.score.has_value(); });
  if (!all_scored) return 0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (*candidates[i].score > *candidates[best].score) best = i;
  }
  return best;
}

}  // namespace vtask::scoring
