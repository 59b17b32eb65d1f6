#include "vtask/linguistics.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "vtask/error.hpp"

namespace vtask::linguistics {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

// Index of the first token (1-based) whose head chain does not reach the root,
// or 0 if the head links form a tree.
int first_cyclic_token(const ParsedSentence& s) {
  const int n = static_cast<int>(s.size());
  for (int i = 1; i <= n; ++i) {
    int cur = i;
    int steps = 0;
    while (cur != 0 && steps <= n) {
      cur = s.token(cur).head;
      ++steps;
    }
    if (cur != 0) return i;
  }
  return 0;
}

struct PendingSentence {
  ParsedSentence sentence;
  std::vector<std::size_t> lines;  // source line of each token
  std::size_t first_line = 0;
};

void finish(PendingSentence& pending, std::vector<ParsedSentence>& out) {
  if (pending.sentence.tokens.empty()) {
    pending = {};
    return;
  }
  const auto& toks = pending.sentence.tokens;
  const int n = static_cast<int>(toks.size());
  int roots = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const ParsedToken& t = toks[i];
    if (t.index != static_cast<int>(i) + 1) {
      throw ConlluError("token id " + std::to_string(t.index) + " out of sequence, expected " +
                            std::to_string(i + 1),
                        pending.lines[i]);
    }
    if (t.head < 0 || t.head > n) {
      throw ConlluError("head " + std::to_string(t.head) + " outside [0, " + std::to_string(n) + "]",
                        pending.lines[i]);
    }
    if (t.head == t.index) throw ConlluError("token is its own head", pending.lines[i]);
    if (t.head == 0) ++roots;
  }
  if (roots != 1) {
    throw ConlluError("sentence has " + std::to_string(roots) + " root tokens, expected 1",
                      pending.first_line);
  }
  if (const int bad = first_cyclic_token(pending.sentence); bad != 0) {
    throw ConlluError("head links form a cycle", pending.lines[static_cast<std::size_t>(bad - 1)]);
  }
  out.push_back(std::move(pending.sentence));
  pending = {};
}

}  // namespace

const char* to_string(SemanticElement element) noexcept {
  switch (element) {
    case SemanticElement::Object:
      return "object";
    case SemanticElement::Attribute:
      return "attribute";
    case SemanticElement::Action:
      return "action";
    case SemanticElement::ProperNoun:
      return "proper_noun";
    case SemanticElement::Other:
      return "other";
  }
  return "other";
}

void validate(const ParsedSentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  int roots = 0;
  for (int i = 1; i <= n; ++i) {
    const ParsedToken& t = sentence.token(i);
    if (t.index != i) throw DomainError("token index " + std::to_string(t.index) + " out of sequence");
    if (t.head < 0 || t.head > n) throw DomainError("head out of range at token " + std::to_string(i));
    if (t.head == i) throw DomainError("token " + std::to_string(i) + " is its own head");
    if (t.head == 0) ++roots;
  }
  if (n > 0 && roots != 1) throw DomainError("sentence must have exactly one root");
  if (first_cyclic_token(sentence) != 0) throw DomainError("head links form a cycle");
}

std::vector<ParsedSentence> parse_conllu(std::string_view src) {
  std::vector<ParsedSentence> out;
  PendingSentence pending;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    auto nl = src.find('\n', pos);
    if (nl == std::string_view::npos) nl = src.size();
    std::string_view line = src.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      finish(pending, out);
      continue;
    }
    if (pending.first_line == 0) pending.first_line = line_no;
    if (line.front() == '#') {
      constexpr std::string_view kSentId = "# sent_id = ";
      if (line.substr(0, kSentId.size()) == kSentId) {
        pending.sentence.id = std::string(line.substr(kSentId.size()));
      }
      continue;
    }

    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ConlluError("expected 10 tab-separated columns, got " + std::to_string(cols.size()),
                        line_no);
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;

    ParsedToken tok;
    if (!parse_int(cols[0], tok.index)) {
      throw ConlluError("token id \"" + std::string(cols[0]) + "\" is not an integer", line_no);
    }
    if (!parse_int(cols[6], tok.head)) {
      throw ConlluError("head \"" + std::string(cols[6]) + "\" is not an integer", line_no);
    }
    tok.surface = std::string(cols[1]);
    tok.upos = std::string(cols[3]);
    tok.deprel = std::string(cols[7]);
    pending.sentence.tokens.push_back(std::move(tok));
    pending.lines.push_back(line_no);
  }
  finish(pending, out);
  return out;
}

std::string render_conllu(const std::vector<ParsedSentence>& sentences) {
  auto col = [](const std::string& s) { return s.empty() ? std::string("_") : s; };
  std::ostringstream os;
  for (const auto& s : sentences) {
    if (!s.id.empty()) os << "# sent_id = " << s.id << '\n';
    for (const auto& t : s.tokens) {
      os << t.index << '\t' << col(t.surface) << "\t_\t" << col(t.upos) << "\t_\t_\t" << t.head
         << '\t' << col(t.deprel) << "\t_\t_\n";
    }
    os << '\n';
  }
  return os.str();
}

SemanticElement classify_upos(std::string_view upos) noexcept {
  if (upos == "PROPN") return SemanticElement::ProperNoun;
  if (upos == "NOUN") return SemanticElement::Object;
  if (upos == "ADJ") return SemanticElement::Attribute;
  if (upos == "VERB") return SemanticElement::Action;
  return SemanticElement::Other;
}

SemanticElement classify_token(const ParsedToken& token) noexcept {
  return classify_upos(token.upos);
}

std::vector<int> token_degrees(const ParsedSentence& sentence) {
  std::vector<int> degree(sentence.size(), 0);
  for (const auto& t : sentence.tokens) {
    if (t.head == 0) continue;
    ++degree[static_cast<std::size_t>(t.index - 1)];
    ++degree[static_cast<std::size_t>(t.head - 1)];
  }
  return degree;
}

int token_complexity(const ParsedSentence& sentence, int index) {
  const int n = static_cast<int>(sentence.size());
  if (index < 1 || index > n) {
    throw DomainError("token index " + std::to_string(index) + " outside [1, " + std::to_string(n) +
                      "]");
  }
  int degree = sentence.token(index).head != 0 ? 1 : 0;
  for (const auto& t : sentence.tokens) {
    if (t.head == index) ++degree;
  }
  return degree;
}

namespace {

bool chunk_relation(std::string_view deprel) {
  if (deprel == "nmod:poss") return true;
  const auto base = deprel.substr(0, deprel.find(':'));
  return base == "det" || base == "amod" || base == "compound" || base == "nummod" ||
         base == "poss";
}

bool is_nominal(const ParsedToken& t) { return t.upos == "NOUN" || t.upos == "PROPN"; }

}  // namespace

std::vector<NounChunk> noun_chunks(const ParsedSentence& sentence) {
  const int n = static_cast<int>(sentence.size());
  std::vector<bool> claimed(sentence.size() + 1, false);
  std::vector<NounChunk> chunks;
  // Right to left: a noun that governs an adjacent compound claims it before
  // the compound can start its own chunk.
  for (int h = n; h >= 1; --h) {
    if (claimed[h] || !is_nominal(sentence.token(h))) continue;
    int start = h;
    while (start > 1) {
      const ParsedToken& left = sentence.token(start - 1);
      if (claimed[start - 1] || left.head != h || !chunk_relation(left.deprel)) break;
      --start;
    }
    for (int i = start; i <= h; ++i) claimed[i] = true;
    chunks.push_back({start, h, h});
  }
  std::reverse(chunks.begin(), chunks.end());
  return chunks;
}

std::string span_text(const ParsedSentence& sentence, int start, int end) {
  std::string out;
  for (int i = start; i <= end; ++i) {
    if (i > start) out += ' ';
    out += sentence.token(i).surface;
  }
  return out;
}

}  // namespace vtask::linguistics
