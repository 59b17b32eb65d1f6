#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vtask::codec {

struct TextSpan {
  std::string text;
  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

/// One quantized coordinate, rendered as "<loc_K>".
struct LocToken {
  int bin = 0;
  friend bool operator==(const LocToken&, const LocToken&) = default;
};

using TokenItem = std::variant<TextSpan, LocToken>;

/// Ordered mix of text spans and location tokens. Streams produced by this
/// library are in normal form: no empty spans and no two adjacent spans.
struct TokenStream {
  std::vector<TokenItem> items;

  void append_text(std::string_view text);
  void append_loc(int bin);
  friend bool operator==(const TokenStream&, const TokenStream&) = default;
};

TokenStream normalized(TokenStream stream);
bool is_normal_form(const TokenStream& stream) noexcept;

std::string loc_surface(int bin);

/// Concatenation of spans with location tokens inlined and no extra whitespace.
std::string render(const TokenStream& stream);

/// Splits raw text into text spans and "<loc_K>" tokens (K in 0..999, no
/// leading zeros). A "<loc_" prefix not forming a valid token throws LexError.
TokenStream lex(std::string_view raw);

/// True if `text` contains anything the lexer would treat as a location token
/// (or a malformed one).
bool contains_loc_surface(std::string_view text) noexcept;

}  // namespace vtask::codec
