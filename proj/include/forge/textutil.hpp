#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace forge {

inline bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_digit_byte(unsigned char c) { return c >= '0' && c <= '9'; }

inline bool is_alpha_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline bool is_upper_byte(unsigned char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower_byte(unsigned char c) { return c >= 'a' && c <= 'z'; }

inline bool is_alnum_byte(unsigned char c) { return is_alpha_byte(c) || is_digit_byte(c); }

// Bytes >= 0x80 belong to multi-byte UTF-8 sequences and are treated as
// word content so a character is never split across tokens.
inline bool is_word_byte(unsigned char c) { return is_alnum_byte(c) || c >= 0x80; }

inline char to_lower_byte(char c) {
  return is_upper_byte(static_cast<unsigned char>(c)) ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = to_lower_byte(c);
  return out;
}

// UTF-8 character boundary: offset 0, the end of the string, or any byte
// that is not a continuation byte.
inline bool is_char_boundary(std::string_view text, std::size_t offset) {
  if (offset == 0 || offset == text.size()) return true;
  if (offset > text.size()) return false;
  return (static_cast<unsigned char>(text[offset]) & 0xC0) != 0x80;
}

inline std::string_view trim_view(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && is_space_byte(static_cast<unsigned char>(s[b]))) ++b;
  std::size_t e = s.size();
  while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (char c : s) {
    if (is_space_byte(static_cast<unsigned char>(c))) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace forge
