#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "aviary/errors.hpp"

namespace aviary::detail {

inline const char* b64_alphabet() {
  return "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

inline std::string base64_encode(const std::uint8_t* data, std::size_t len) {
  const char* tab = b64_alphabet();
  std::string out;
  out.reserve((len + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= len; i += 3) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
    out.push_back(tab[(v >> 18) & 63]);
    out.push_back(tab[(v >> 12) & 63]);
    out.push_back(tab[(v >> 6) & 63]);
    out.push_back(tab[v & 63]);
  }
  if (i + 1 == len) {
    const std::uint32_t v = data[i] << 16;
    out.push_back(tab[(v >> 18) & 63]);
    out.push_back(tab[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (i + 2 == len) {
    const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
    out.push_back(tab[(v >> 18) & 63]);
    out.push_back(tab[(v >> 12) & 63]);
    out.push_back(tab[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
  int lut[256];
  for (int& v : lut) v = -1;
  const char* tab = b64_alphabet();
  for (int i = 0; i < 64; ++i) lut[static_cast<unsigned char>(tab[i])] = i;

  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=' || ch == '\n' || ch == '\r') continue;
    const int v = lut[static_cast<unsigned char>(ch)];
    if (v < 0) throw DecodeError("base64: invalid character in payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

inline std::string floats_to_base64(const std::vector<float>& values) {
  return base64_encode(reinterpret_cast<const std::uint8_t*>(values.data()),
                       values.size() * sizeof(float));
}

inline std::vector<float> base64_to_floats(const std::string& text) {
  const auto bytes = base64_decode(text);
  if (bytes.size() % sizeof(float) != 0) {
    throw DecodeError("base64: payload length is not a multiple of 4");
  }
  std::vector<float> out(bytes.size() / sizeof(float));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

}  // namespace aviary::detail
