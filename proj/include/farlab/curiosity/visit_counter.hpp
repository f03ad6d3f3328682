#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace farlab::curiosity {

/// MD5 digest of an observation's canonical byte encoding.
using ObsKey = std::array<std::uint8_t, 16>;

struct ObsKeyHash {
  std::size_t operator()(const ObsKey& k) const noexcept;
};

ObsKey md5_key(std::span<const std::uint8_t> bytes);
std::string to_hex(const ObsKey& key);
ObsKey key_from_hex(const std::string& hex);

/// Row-major little-endian IEEE-754 doubles.
std::vector<std::uint8_t> encode_vector(std::span<const double> obs);

inline ObsKey key_of(std::span<const double> obs) { return md5_key(encode_vector(obs)); }
/// Discrete observations hash their raw cell codes.
inline ObsKey key_of(std::span<const std::uint8_t> codes) { return md5_key(codes); }

// Visit counts with exponential decay N <- gamma * N + b applied once per
// environment step. Counts are stored divided by a global scale that absorbs
// the per-step decay, so a step costs O(1) instead of touching every entry.
class VisitCounter {
 public:
  explicit VisitCounter(double gamma_decay = 1.0);

  /// Multiplies every count by gamma, then adds 1 to `visited` if given.
  void decay_step(const std::optional<ObsKey>& visited);

  /// Registers a visit (one decay step) and returns 1 / sqrt(N) using the
  /// count after the visit.
  double reward(const ObsKey& key);

  /// Reward the observation would receive on its next visit without
  /// registering it: unseen observations score 1.
  double peek_reward(const ObsKey& key) const;

  double count(const ObsKey& key) const;
  std::size_t size() const { return stored_.size(); }
  double gamma() const { return gamma_; }

  std::unordered_map<ObsKey, double, ObsKeyHash> counts() const;

  nlohmann::json to_json() const;
  static VisitCounter from_json(const nlohmann::json& doc);

 private:
  void renormalize();

  double gamma_ = 1.0;
  double scale_ = 1.0;
  std::unordered_map<ObsKey, double, ObsKeyHash> stored_;
};

}  // namespace farlab::curiosity
