#include "farlab/memory/long_term_memory.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace farlab::memory {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine_similarity: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double s = dot / (std::sqrt(na) * std::sqrt(nb));
  return s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
}

LongTermMemory::LongTermMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("LTM capacity must be positive");
}

std::optional<FragmentEntry> LongTermMemory::store(FragmentEntry entry) {
  entries_.push_back(std::move(entry));
  if (entries_.size() <= capacity_) return std::nullopt;

  std::size_t victim = 0;
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].last_used < entries_[victim].last_used) victim = i;
  FragmentEntry evicted = std::move(entries_[victim]);
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(victim));
  return evicted;
}

FragmentEntry LongTermMemory::take(std::size_t index) {
  if (index >= entries_.size())
    throw std::logic_error("LTM index " + std::to_string(index) + " out of range");
  FragmentEntry e = std::move(entries_[index]);
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(index));
  return e;
}

std::optional<std::size_t> LongTermMemory::best_match(std::span<const double> feat,
                                                      double threshold) const {
  std::optional<std::size_t> best;
  double best_sim = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double s = cosine_similarity(feat, entries_[i].key);
    if (s >= threshold && s > best_sim) {
      best = i;
      best_sim = s;
    }
  }
  return best;
}

double LongTermMemory::max_similarity(std::span<const double> feat) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& e : entries_) best = std::max(best, cosine_similarity(feat, e.key));
  return best;
}

}  // namespace farlab::memory
