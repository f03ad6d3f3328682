#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "farlab/curiosity/rnd_module.hpp"

namespace farlab::memory {

/// Cosine similarity; 0 when either vector has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct FragmentEntry {
  std::int64_t id = 0;
  std::vector<double> key;  // phi of the observation the module was created on
  curiosity::RndModule module;
  std::int64_t last_used = 0;
};

// Capacity-bounded store of inactive curiosity modules. Entries stay in
// insertion order; overflow evicts the smallest last_used, the earliest
// inserted among ties.
class LongTermMemory {
 public:
  explicit LongTermMemory(std::size_t capacity = 800);

  /// Appends the entry, evicting the least recently used one if over
  /// capacity. Returns the evicted entry.
  std::optional<FragmentEntry> store(FragmentEntry entry);

  /// Removes and returns entry `index`.
  FragmentEntry take(std::size_t index);

  /// Highest-similarity entry with similarity >= threshold.
  std::optional<std::size_t> best_match(std::span<const double> feat, double threshold) const;

  /// Max similarity over all keys; -inf when empty.
  double max_similarity(std::span<const double> feat) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::vector<FragmentEntry>& entries() const { return entries_; }
  const FragmentEntry& at(std::size_t i) const { return entries_.at(i); }

 private:
  std::size_t capacity_;
  std::vector<FragmentEntry> entries_;
};

}  // namespace farlab::memory
