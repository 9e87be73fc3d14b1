#include "glossoforge/unicode.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "glossoforge/error.hpp"

namespace glossoforge::unicode {
namespace {

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  return *n;
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFD normalizer unavailable");
  return *n;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

icu::UnicodeString from_utf8_checked(std::string_view utf8) {
  // fromUTF8 silently substitutes U+FFFD; validate first so bad bytes surface.
  int32_t i = 0;
  const auto len = static_cast<int32_t>(utf8.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(utf8.data(), i, len, c);
    if (c < 0) throw InputError("malformed UTF-8 in input");
  }
  return icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), len));
}

std::string fold_code_point(UChar32 cp) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString decomposed = nfd().normalize(icu::UnicodeString(cp), status);
  if (U_FAILURE(status)) throw Error("ICU decomposition failed");
  icu::UnicodeString kept;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 c = decomposed.char32At(i);
    if (u_charType(c) != U_NON_SPACING_MARK) kept.append(c);
    i += U16_LENGTH(c);
  }
  icu::UnicodeString recomposed = nfc().normalize(kept, status);
  if (U_FAILURE(status)) throw Error("ICU composition failed");
  return to_utf8(recomposed);
}

}  // namespace

std::string lower(std::string_view utf8) {
  icu::UnicodeString s = from_utf8_checked(utf8);
  s.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString composed = nfc().normalize(s, status);
  if (U_FAILURE(status)) throw Error("ICU composition failed");
  return to_utf8(composed);
}

std::string fold(std::string_view utf8) {
  const std::string lowered = lower(utf8);
  std::string out;
  out.reserve(lowered.size());
  int32_t i = 0;
  const auto len = static_cast<int32_t>(lowered.size());
  while (i < len) {
    UChar32 c;
    U8_NEXT(lowered.data(), i, len, c);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out += fold_code_point(c);
    }
  }
  return out;
}

std::vector<std::string> code_points(std::string_view utf8) {
  std::vector<std::string> out;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(utf8.size());
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(utf8.data(), i, len, c);
    if (c < 0) throw InputError("malformed UTF-8 in input");
    out.emplace_back(utf8.substr(start, i - start));
  }
  return out;
}

bool is_ascii_lower_alpha(std::string_view s) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch < 'a' || ch > 'z') return false;
  }
  return true;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  int32_t i = 0;
  const auto len = static_cast<int32_t>(text.size());
  while (i < len) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(text.data(), i, len, c);
    if (c < 0) throw InputError("malformed UTF-8 in input");
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string strip_edge_punctuation(std::string_view token) {
  auto is_edge = [](UChar32 c) {
    return u_ispunct(c) || (U_GET_GC_MASK(c) & U_GC_S_MASK) != 0;
  };
  const auto cps = code_points(token);
  std::size_t first = 0;
  std::size_t last = cps.size();
  auto cp_value = [&](std::size_t k) {
    int32_t i = 0;
    UChar32 c;
    U8_NEXT(cps[k].data(), i, static_cast<int32_t>(cps[k].size()), c);
    return c;
  };
  while (first < last && is_edge(cp_value(first))) ++first;
  while (last > first && is_edge(cp_value(last - 1))) --last;
  std::string out;
  for (std::size_t k = first; k < last; ++k) out += cps[k];
  return out;
}

}  // namespace glossoforge::unicode
