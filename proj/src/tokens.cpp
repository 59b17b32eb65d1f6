#include "vtask/tokens.hpp"

#include "vtask/error.hpp"
#include "vtask/geometry.hpp"

namespace vtask::codec {

namespace {

constexpr std::string_view kLocPrefix = "<loc_";

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

}  // namespace

void TokenStream::append_text(std::string_view text) {
  if (text.empty()) return;
  if (!items.empty()) {
    if (auto* span = std::get_if<TextSpan>(&items.back())) {
      span->text.append(text);
      return;
    }
  }
  items.emplace_back(TextSpan{std::string(text)});
}

void TokenStream::append_loc(int bin) {
  if (bin < 0 || bin >= geometry::kNumBins) {
    throw CodecError("location bin " + std::to_string(bin) + " is outside [0, 999]");
  }
  items.emplace_back(LocToken{bin});
}

TokenStream normalized(TokenStream stream) {
  TokenStream out;
  for (auto& item : stream.items) {
    if (auto* span = std::get_if<TextSpan>(&item)) {
      out.append_text(span->text);
    } else {
      out.append_loc(std::get<LocToken>(item).bin);
    }
  }
  return out;
}

bool is_normal_form(const TokenStream& stream) noexcept {
  bool prev_text = false;
  for (const auto& item : stream.items) {
    if (const auto* span = std::get_if<TextSpan>(&item)) {
      if (span->text.empty() || prev_text) return false;
      prev_text = true;
    } else {
      const int bin = std::get<LocToken>(item).bin;
      if (bin < 0 || bin >= geometry::kNumBins) return false;
      prev_text = false;
    }
  }
  return true;
}

std::string loc_surface(int bin) { return "<loc_" + std::to_string(bin) + ">"; }

std::string render(const TokenStream& stream) {
  std::string out;
  for (const auto& item : stream.items) {
    if (const auto* span = std::get_if<TextSpan>(&item)) {
      out += span->text;
    } else {
      out += loc_surface(std::get<LocToken>(item).bin);
    }
  }
  return out;
}

TokenStream lex(std::string_view raw) {
  TokenStream out;
  std::size_t text_start = 0;
  std::size_t pos = 0;
  while ((pos = raw.find(kLocPrefix, pos)) != std::string_view::npos) {
    std::size_t cur = pos + kLocPrefix.size();
    const std::size_t digits_start = cur;
    while (cur < raw.size() && is_digit(raw[cur])) ++cur;
    const std::size_t ndigits = cur - digits_start;
    if (ndigits == 0) throw LexError("location token without digits", pos);
    if (cur >= raw.size() || raw[cur] != '>') {
      throw LexError("unterminated location token", pos);
    }
    if (ndigits > 1 && raw[digits_start] == '0') {
      throw LexError("location token with leading zero", pos);
    }
    if (ndigits > 3) throw LexError("location bin exceeds 999", pos);
    int bin = 0;
    for (std::size_t i = digits_start; i < cur; ++i) bin = bin * 10 + (raw[i] - '0');
    if (bin >= geometry::kNumBins) throw LexError("location bin exceeds 999", pos);

    out.append_text(raw.substr(text_start, pos - text_start));
    out.append_loc(bin);
    pos = cur + 1;
    text_start = pos;
  }
  out.append_text(raw.substr(text_start));
  return out;
}

bool contains_loc_surface(std::string_view text) noexcept {
  return text.find(kLocPrefix) != std::string_view::npos;
}

}  // namespace vtask::codec
