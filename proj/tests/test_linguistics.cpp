#include <gtest/gtest.h>

#include <numeric>

#include "vtask/error.hpp"
#include "vtask/linguistics.hpp"
#include "support/generators.hpp"

using namespace vtask;
using namespace vtask::linguistics;

namespace {

std::string row(int id, const std::string& form, const std::string& upos, int head, const std::string& rel) {
  return std::to_string(id) + "\t" + form + "\t_\t" + upos + "\t_\t_\t" + std::to_string(head) + "\t" + rel +
         "\t_\t_\n";
}

// "The big dog chased a cat"
const std::string kSentence = "# sent_id = s1\n# text = The big dog chased a cat\n" + row(1, "The", "DET", 3, "det") +
                              row(2, "big", "ADJ", 3, "amod") + row(3, "dog", "NOUN", 4, "nsubj") +
                              row(4, "chased", "VERB", 0, "root") + row(5, "a", "DET", 6, "det") +
                              row(6, "cat", "NOUN", 4, "obj");

int brute_degree(const ParsedSentence& s, int index) {
  int d = 0;
  for (const auto& t : s.tokens) {
    if (t.index == index && t.head != 0) ++d;
    if (t.head == index) ++d;
  }
  return d;
}

}  // namespace

TEST(Conllu, ParsesSentence) {
  const auto sentences = parse_conllu(kSentence);
  ASSERT_EQ(sentences.size(), 1u);
  const auto& s = sentences[0];
  EXPECT_EQ(s.id, "s1");
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s.token(3).surface, "dog");
  EXPECT_EQ(s.token(3).head, 4);
  EXPECT_EQ(s.token(4).deprel, "root");
  EXPECT_EQ(s.token(2).upos, "ADJ");
}

TEST(Conllu, MultipleSentencesCrlfAndRanges) {
  std::string two = kSentence + "\n" + "# sent_id = s2\n" + "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" +
                    row(1, "do", "AUX", 3, "aux") + row(2, "n't", "PART", 3, "advmod") +
                    "2.1\tx\t_\tX\t_\t_\t_\t_\t_\t_\n" + row(3, "go", "VERB", 0, "root");
  std::string crlf;
  for (char c : two) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  for (const auto& text : {two, crlf}) {
    const auto sentences = parse_conllu(text);
    ASSERT_EQ(sentences.size(), 2u);
    EXPECT_EQ(sentences[1].id, "s2");
    EXPECT_EQ(sentences[1].size(), 3u);
  }
}

TEST(Conllu, RenderRoundTrip) {
  const auto sentences = parse_conllu(kSentence);
  EXPECT_EQ(parse_conllu(render_conllu(sentences)), sentences);
  gen::Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    std::vector<ParsedSentence> many;
    for (int k = 0; k < 3; ++k) {
      many.push_back(gen::tree(rng, gen::int_in(rng, 1, 20)));
      many.back().id = "t" + std::to_string(i) + "-" + std::to_string(k);
    }
    ASSERT_EQ(parse_conllu(render_conllu(many)), many);
  }
}

TEST(Conllu, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_conllu(text);
    } catch (const ConlluError& e) {
      return e.line();
    }
    return 0;
  };
  // Column count on line 2.
  EXPECT_EQ(line_of(row(1, "a", "DET", 2, "det") + "2\tdog\t_\tNOUN\t0\troot\n"), 2u);
  // Non-integer head on line 1.
  EXPECT_EQ(line_of("1\ta\t_\tDET\t_\t_\tx\tdet\t_\t_\n"), 1u);
  // Cycle 1 -> 2 -> 1 with a separate root; reported on the sentence.
  EXPECT_GT(line_of(row(1, "a", "X", 2, "dep") + row(2, "b", "X", 1, "dep") + row(3, "c", "X", 0, "root")), 0u);
  // Two roots.
  EXPECT_GT(line_of(row(1, "a", "X", 0, "root") + row(2, "b", "X", 0, "root")), 0u);
  // Head out of range on line 3 (after a comment).
  EXPECT_EQ(line_of("# c\n" + row(1, "a", "X", 0, "root") + row(2, "b", "X", 7, "dep")), 3u);
  // Self-loop.
  EXPECT_EQ(line_of(row(1, "a", "X", 0, "root") + row(2, "b", "X", 2, "dep")), 2u);
}

TEST(Validate, RejectsBadTrees) {
  ParsedSentence s = parse_conllu(kSentence)[0];
  EXPECT_NO_THROW(validate(s));
  ParsedSentence cyc = s;
  cyc.tokens[3].head = 3;  // chased -> dog -> chased, no root
  EXPECT_THROW(validate(cyc), DomainError);
  ParsedSentence gap = s;
  gap.tokens[2].index = 9;
  EXPECT_THROW(validate(gap), DomainError);
}

TEST(Complexity, ChainDegrees) {
  // a <- b -> c: the middle token has two neighbours.
  const auto s = parse_conllu(row(1, "a", "DET", 2, "det") + row(2, "b", "NOUN", 0, "root") +
                              row(3, "c", "ADJ", 2, "amod"))[0];
  EXPECT_EQ(token_degrees(s), (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(token_complexity(s, 2), 2);
  EXPECT_THROW(token_complexity(s, 4), DomainError);
  EXPECT_THROW(token_complexity(s, 0), DomainError);
}

TEST(Complexity, SingleTokenHasDegreeZero) {
  const auto s = parse_conllu(row(1, "dog", "NOUN", 0, "root"))[0];
  EXPECT_EQ(token_complexity(s, 1), 0);
}

TEST(Complexity, HandshakeOnRandomTrees) {
  gen::Rng rng(32);
  for (int i = 0; i < 1000; ++i) {
    const auto s = gen::tree(rng, gen::int_in(rng, 1, 30));
    ASSERT_NO_THROW(validate(s));
    int total = 0;
    for (int k = 1; k <= static_cast<int>(s.size()); ++k) {
      const int d = token_complexity(s, k);
      ASSERT_EQ(d, brute_degree(s, k));
      total += d;
    }
    ASSERT_EQ(total, 2 * (static_cast<int>(s.size()) - 1));
  }
}

TEST(Classify, UposMapping) {
  EXPECT_EQ(classify_upos("NOUN"), SemanticElement::Object);
  EXPECT_EQ(classify_upos("PROPN"), SemanticElement::ProperNoun);
  EXPECT_EQ(classify_upos("ADJ"), SemanticElement::Attribute);
  EXPECT_EQ(classify_upos("VERB"), SemanticElement::Action);
  EXPECT_EQ(classify_upos("AUX"), SemanticElement::Other);
  EXPECT_EQ(classify_upos("DET"), SemanticElement::Other);
}

TEST(NounChunks, Examples) {
  const auto s = parse_conllu(kSentence)[0];
  const auto chunks = noun_chunks(s);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0], (NounChunk{1, 3, 3}));
  EXPECT_EQ(chunks[1], (NounChunk{5, 6, 6}));
  EXPECT_EQ(span_text(s, chunks[0].start, chunks[0].end), "The big dog");

  // "the tennis ball": the compound noun is absorbed by its head.
  const auto t = parse_conllu(row(1, "the", "DET", 3, "det") + row(2, "tennis", "NOUN", 3, "compound") +
                              row(3, "ball", "NOUN", 0, "root"))[0];
  EXPECT_EQ(noun_chunks(t), (std::vector<NounChunk>{{1, 3, 3}}));

  // A non-adjacent determiner does not join the chunk.
  const auto u = parse_conllu(row(1, "dogs", "NOUN", 0, "root") + row(2, "run", "VERB", 1, "acl") +
                              row(3, "Paris", "PROPN", 2, "obl"))[0];
  EXPECT_EQ(noun_chunks(u), (std::vector<NounChunk>{{1, 1, 1}, {3, 3, 3}}));
}

TEST(NounChunks, DisjointOrderedAndHeaded) {
  gen::Rng rng(33);
  for (int i = 0; i < 500; ++i) {
    const auto s = gen::tree(rng, gen::int_in(rng, 1, 30));
    const auto chunks = noun_chunks(s);
    int last_end = 0;
    for (const auto& c : chunks) {
      ASSERT_GT(c.start, last_end);
      ASSERT_LE(c.start, c.head);
      ASSERT_EQ(c.end, c.head);
      const auto& upos = s.token(c.head).upos;
      ASSERT_TRUE(upos == "NOUN" || upos == "PROPN");
      last_end = c.end;
    }
  }
}
