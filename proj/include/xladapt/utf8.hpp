#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xladapt::utf8 {

inline constexpr uint32_t kReplacement = 0xFFFD;

inline void append_codepoint(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

constexpr bool is_hangul_syllable(uint32_t cp) { return cp >= 0xAC00 && cp <= 0xD7A3; }

constexpr bool is_hangul_jamo(uint32_t cp) {
  return (cp >= 0x1100 && cp <= 0x11FF) || (cp >= 0x3130 && cp <= 0x318F);
}

namespace detail {

// Decodes one codepoint starting at s[i]. Returns the codepoint and advances
// i, or returns nullopt on malformed input (i advanced by one byte).
inline std::optional<uint32_t> next_codepoint(std::string_view s, size_t& i) {
  const auto* p = reinterpret_cast<const unsigned char*>(s.data());
  unsigned char b0 = p[i];
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  size_t cont;
  uint32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    cont = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    cont = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    cont = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return std::nullopt;
  }
  if (i + cont >= s.size()) {
    ++i;
    return std::nullopt;
  }
  for (size_t k = 1; k <= cont; ++k) {
    unsigned char b = p[i + k];
    if ((b & 0xC0) != 0x80) {
      ++i;
      return std::nullopt;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  constexpr uint32_t kMin[4] = {0, 0x80, 0x800, 0x10000};
  if (cp < kMin[cont] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++i;
    return std::nullopt;
  }
  i += cont + 1;
  return cp;
}

}  // namespace detail

// Strict decode; false on any malformed sequence (overlongs, surrogates,
// truncation, out-of-range).
inline bool decode(std::string_view s, std::vector<uint32_t>& out) {
  out.clear();
  size_t i = 0;
  while (i < s.size()) {
    auto cp = detail::next_codepoint(s, i);
    if (!cp) return false;
    out.push_back(*cp);
  }
  return true;
}

inline bool is_valid(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    if (!detail::next_codepoint(s, i)) return false;
  }
  return true;
}

inline std::optional<std::vector<uint32_t>> try_decode(std::string_view s) {
  std::vector<uint32_t> out;
  if (!decode(s, out)) return std::nullopt;
  return out;
}

// Lenient decode: malformed bytes become U+FFFD, one per byte.
inline std::vector<uint32_t> decode_lenient(std::string_view s) {
  std::vector<uint32_t> out;
  out.reserve(s.size());
  size_t i = 0;
  while (i < s.size()) {
    auto cp = detail::next_codepoint(s, i);
    out.push_back(cp.value_or(kReplacement));
  }
  return out;
}

// Lenient decode that also records the byte offset of each codepoint plus a
// final entry equal to s.size(), so byte slices per codepoint window are
// recoverable.
inline std::vector<uint32_t> decode_lenient_with_offsets(std::string_view s,
                                                         std::vector<size_t>& offsets) {
  std::vector<uint32_t> out;
  out.reserve(s.size());
  offsets.clear();
  size_t i = 0;
  while (i < s.size()) {
    offsets.push_back(i);
    auto cp = detail::next_codepoint(s, i);
    out.push_back(cp.value_or(kReplacement));
  }
  offsets.push_back(s.size());
  return out;
}

}  // namespace xladapt::utf8
