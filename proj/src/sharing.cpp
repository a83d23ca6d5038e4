// Copyright 2026 The txagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "txagg/sharing.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cstring>

namespace txagg::sharing {

namespace {

// Byte stream SHA-256(seed || be64(counter)), counter = 0,1,2,...
class HashStream {
 public:
  explicit HashStream(const Seed& seed) : seed_(seed) {}

  std::uint64_t next_word() {
    if (offset_ == block_.size()) refill();
    std::uint64_t w = 0;
    for (int i = 0; i < 8; ++i) {
      w = (w << 8) | block_[offset_++];
    }
    return w;
  }

 private:
  void refill() {
    std::array<std::uint8_t, 40> input{};
    std::memcpy(input.data(), seed_.data(), seed_.size());
    for (int i = 0; i < 8; ++i) {
      input[32 + i] =
          static_cast<std::uint8_t>(counter_ >> (8 * (7 - i)));
    }
    SHA256(input.data(), input.size(), block_.data());
    offset_ = 0;
    ++counter_;
  }

  Seed seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t offset_ = 32;  // forces the first refill
};

std::uint64_t draw_below(HashStream& stream, std::uint64_t r) {
  const std::uint64_t rem = (0 - r) % r;  // 2^64 mod r
  std::uint64_t v = stream.next_word();
  if (rem != 0) {
    const std::uint64_t max_accepted = ~0ULL - rem;
    while (v > max_accepted) v = stream.next_word();
  }
  return v % r;
}

}  // namespace

std::vector<std::string> select_delegates(const std::vector<std::string>& hubs,
                                          std::size_t k_d, const Seed& seed) {
  if (k_d < 1 || k_d > hubs.size()) {
    throw BadKError(std::to_string(k_d) + " of " +
                    std::to_string(hubs.size()) + " hubs");
  }
  std::vector<std::string> pool = hubs;
  HashStream stream(seed);
  for (std::size_t i = 0; i < k_d; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(draw_below(stream, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k_d);
  return pool;
}

std::vector<Share> share_words(const std::string& owner,
                               const std::vector<std::uint64_t>& words,
                               std::size_t k_d, SplitMix64& rng) {
  if (k_d < 1) throw BadKError("need at least one share");
  std::vector<Share> shares(k_d);
  for (std::size_t i = 0; i < k_d; ++i) {
    shares[i].owner = owner;
    shares[i].index = i + 1;
    shares[i].payload.resize(words.size());
  }
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i + 1 < k_d; ++i) {
      const std::uint64_t r = rng.next();
      shares[i].payload[w] = r;
      acc += r;
    }
    shares[k_d - 1].payload[w] = words[w] - acc;  // mod 2^64
  }
  return shares;
}

std::vector<std::uint64_t> reconstruct_words(const std::vector<Share>& shares,
                                             std::size_t k_d) {
  if (shares.size() != k_d) {
    throw MissingShareError("have " + std::to_string(shares.size()) +
                            " of " + std::to_string(k_d));
  }
  if (shares.empty()) throw MissingShareError("no shares at all");
  std::vector<bool> seen(k_d, false);
  for (const Share& s : shares) {
    if (s.index < 1 || s.index > k_d || seen[s.index - 1]) {
      throw MissingShareError("share indices do not cover 1.." +
                              std::to_string(k_d));
    }
    seen[s.index - 1] = true;
    if (s.payload.size() != shares.front().payload.size()) {
      throw LengthMismatchError("share " + std::to_string(s.index));
    }
  }
  std::vector<std::uint64_t> words(shares.front().payload.size(), 0);
  for (const Share& s : shares) {
    for (std::size_t w = 0; w < words.size(); ++w) {
      words[w] += s.payload[w];  // mod 2^64
    }
  }
  return words;
}

void append_word(std::vector<std::uint64_t>& words, std::uint64_t w) {
  words.push_back(w);
}

void append_string(std::vector<std::uint64_t>& words, const std::string& s) {
  words.push_back(s.size());
  for (std::size_t i = 0; i < s.size(); i += 8) {
    std::uint64_t w = 0;
    for (std::size_t b = 0; b < 8 && i + b < s.size(); ++b) {
      w |= static_cast<std::uint64_t>(
               static_cast<std::uint8_t>(s[i + b]))
           << (8 * b);
    }
    words.push_back(w);
  }
}

std::uint64_t WordReader::take() {
  if (pos >= words.size()) {
    throw LengthMismatchError("payload truncated");
  }
  return words[pos++];
}

std::string WordReader::take_string() {
  const std::uint64_t len = take();
  std::string s;
  s.reserve(len);
  for (std::uint64_t i = 0; i < len; i += 8) {
    const std::uint64_t w = take();
    for (std::uint64_t b = 0; b < 8 && i + b < len; ++b) {
      s.push_back(static_cast<char>((w >> (8 * b)) & 0xff));
    }
  }
  return s;
}

}  // namespace txagg::sharing
