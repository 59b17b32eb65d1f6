#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vtask::scoring {

/// Model distribution over the vocabulary at one decoding step.
struct StepDistribution {
  std::vector<double> probs;
};

struct TargetSequence {
  std::vector<std::size_t> ids;
};

/// Tolerance on |sum(probs) - 1| accepted by validate().
inline constexpr double kProbabilitySumTolerance = 1e-6;

void validate(const StepDistribution& step);

/// Negative log-likelihood -sum_i ln P(y_i | y_<i, x) of the target under the
/// per-step distributions. Returns +infinity when a target probability is 0.
/// Throws DomainError on a length mismatch, an invalid distribution or an id
/// outside the vocabulary.
double sequence_nll(std::span<const StepDistribution> steps, const TargetSequence& target);

/// Cosine similarity of case-folded whitespace-token count vectors, in [0, 1].
double text_similarity(std::string_view a, std::string_view b);

struct Candidate {
  std::string text;
  std::optional<double> score;
};

/// argmax of the external scores (lowest index on ties) when every candidate
/// carries one; otherwise index 0. Throws DomainError on an empty list.
std::size_t select_best(std::span<const Candidate> candidates);

}  // namespace vtask::scoring
