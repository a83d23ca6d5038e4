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
//
// Delegate selection from common randomness and (k,k) additive secret
// sharing over the 2^64 ring.

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "txagg/rng.hpp"

namespace txagg::sharing {

using Seed = std::array<std::uint8_t, 32>;

struct BadKError : std::runtime_error {
  explicit BadKError(const std::string& what)
      : std::runtime_error("bad delegate count: " + what) {}
};

struct MissingShareError : std::runtime_error {
  explicit MissingShareError(const std::string& what)
      : std::runtime_error("missing share: " + what) {}
};

struct LengthMismatchError : std::runtime_error {
  explicit LengthMismatchError(const std::string& what)
      : std::runtime_error("share length mismatch: " + what) {}
};

// Deterministic partial Fisher-Yates over the hub list, driven by the byte
// stream SHA-256(seed || counter) for counter = 0,1,2,... where counter is
// encoded as 8 bytes big-endian. The stream is consumed 8 bytes at a time
// as big-endian words; each index is drawn by rejection sampling (a word v
// is accepted for modulus r when v <= 2^64 - (2^64 mod r) - 1). The first
// k_d positions of the shuffled list are the delegates; identical inputs
// give identical delegates on every platform.
std::vector<std::string> select_delegates(const std::vector<std::string>& hubs,
                                          std::size_t k_d, const Seed& seed);

struct Share {
  std::string owner;
  std::size_t index = 0;  // 1..k_d
  std::vector<std::uint64_t> payload;
};

// Additive (k,k) sharing: payloads of the k_d shares sum to the input
// words modulo 2^64; any k_d - 1 of them are uniformly distributed.
std::vector<Share> share_words(const std::string& owner,
                               const std::vector<std::uint64_t>& words,
                               std::size_t k_d, SplitMix64& rng);

// Reconstruction requires every index 1..k_d exactly once and equal
// payload lengths. Throws MissingShareError / LengthMismatchError.
std::vector<std::uint64_t> reconstruct_words(const std::vector<Share>& shares,
                                             std::size_t k_d);

// Word-level serialization helpers for the protocol payloads: strings are
// encoded as a length word followed by their bytes packed little-endian
// eight per word.
void append_word(std::vector<std::uint64_t>& words, std::uint64_t w);
void append_string(std::vector<std::uint64_t>& words, const std::string& s);

struct WordReader {
  const std::vector<std::uint64_t>& words;
  std::size_t pos = 0;

  std::uint64_t take();
  std::string take_string();
  bool done() const { return pos == words.size(); }
};

}  // namespace txagg::sharing
