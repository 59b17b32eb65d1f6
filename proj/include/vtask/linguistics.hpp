#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vtask::linguistics {

struct ParsedToken {
  int index = 0;  // 1-based position in the sentence
  std::string surface;
  std::string upos;
  int head = 0;  // 0 = attached to the virtual root
  std::string deprel;
  friend bool operator==(const ParsedToken&, const ParsedToken&) = default;
};

/// A dependency-parsed sentence. `id` carries the "# sent_id" comment when present.
struct ParsedSentence {
  std::string id;
  std::vector<ParsedToken> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  const ParsedToken& token(int index) const { return tokens.at(static_cast<std::size_t>(index - 1)); }
  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;
};

enum class SemanticElement { Object, Attribute, Action, ProperNoun, Other };

const char* to_string(SemanticElement element) noexcept;

/// Checks sequential indices, head ranges, a single root and acyclicity.
/// Throws DomainError on the first violation.
void validate(const ParsedSentence& sentence);

/// Reads 10-column CoNLL-U. Comments, multiword ranges ("3-4") and empty
/// nodes ("3.1") are skipped. Throws ConlluError with the offending line.
std::vector<ParsedSentence> parse_conllu(std::string_view src);

/// Writes the inverse of parse_conllu; columns this library does not model are "_".
std::string render_conllu(const std::vector<ParsedSentence>& sentences);

SemanticElement classify_token(const ParsedToken& token) noexcept;
SemanticElement classify_upos(std::string_view upos) noexcept;

/// Degree of token `index` (1-based) in the undirected parse graph. The link
/// from the root token to the virtual root is not an edge.
int token_complexity(const ParsedSentence& sentence, int index);

/// Degree of every token, in token order.
std::vector<int> token_degrees(const ParsedSentence& sentence);

struct NounChunk {
  int start = 0;  // 1-based, inclusive
  int end = 0;    // 1-based, inclusive
  int head = 0;
  friend bool operator==(const NounChunk&, const NounChunk&) = default;
};

/// Each NOUN/PROPN head extended leftwards over adjacent dependents attached to
/// it by det, amod, compound, nummod or poss. Governing nouns claim their
/// dependents first, so spans are disjoint. Ordered by start.
std::vector<NounChunk> noun_chunks(const ParsedSentence& sentence);

/// Surfaces of tokens start..end joined by single spaces.
std::string span_text(const ParsedSentence& sentence, int start, int end);

}  // namespace vtask::linguistics
