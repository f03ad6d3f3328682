#include "farlab/curiosity/visit_counter.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace farlab::curiosity {

namespace {
// Below this the stored values are folded back into true counts.
constexpr double kMinScale = 1e-120;
}  // namespace

std::size_t ObsKeyHash::operator()(const ObsKey& k) const noexcept {
  std::uint64_t h;
  std::memcpy(&h, k.data(), sizeof(h));
  return static_cast<std::size_t>(h);
}

ObsKey md5_key(std::span<const std::uint8_t> bytes) {
  ObsKey out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_md5(), nullptr) != 1 ||
      len != out.size())
    throw std::runtime_error("MD5 digest failed");
  return out;
}

std::string to_hex(const ObsKey& key) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(32);
  for (auto b : key) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xF]);
  }
  return s;
}

ObsKey key_from_hex(const std::string& hex) {
  if (hex.size() != 32) throw std::invalid_argument("observation key must be 32 hex digits");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex digit in observation key");
  };
  ObsKey k{};
  for (std::size_t i = 0; i < 16; ++i)
    k[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  return k;
}

std::vector<std::uint8_t> encode_vector(std::span<const double> obs) {
  std::vector<std::uint8_t> bytes(obs.size() * 8);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(obs[i]);
    for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return bytes;
}

VisitCounter::VisitCounter(double gamma_decay) : gamma_(gamma_decay) {
  if (!(gamma_decay > 0.0 && gamma_decay <= 1.0))
    throw std::invalid_argument("visit decay factor must lie in (0, 1]");
}

void VisitCounter::renormalize() {
  for (auto& [key, v] : stored_) v *= scale_;
  scale_ = 1.0;
}

void VisitCounter::decay_step(const std::optional<ObsKey>& visited) {
  if (gamma_ != 1.0) {
    scale_ *= gamma_;
    if (scale_ < kMinScale) renormalize();
  }
  if (visited) stored_[*visited] += 1.0 / scale_;
}

double VisitCounter::reward(const ObsKey& key) {
  decay_step(key);
  return 1.0 / std::sqrt(count(key));
}

double VisitCounter::peek_reward(const ObsKey& key) const {
  const double n = count(key);
  return n > 0.0 ? 1.0 / std::sqrt(n) : 1.0;
}

double VisitCounter::count(const ObsKey& key) const {
  const auto it = stored_.find(key);
  return it == stored_.end() ? 0.0 : it->second * scale_;
}

std::unordered_map<ObsKey, double, ObsKeyHash> VisitCounter::counts() const {
  std::unordered_map<ObsKey, double, ObsKeyHash> out;
  out.reserve(stored_.size());
  for (const auto& [key, v] : stored_) out.emplace(key, v * scale_);
  return out;
}

nlohmann::json VisitCounter::to_json() const {
  // Sorted so identical counters serialize to identical bytes.
  std::map<std::string, double> sorted;
  for (const auto& [key, v] : stored_) sorted.emplace(to_hex(key), v);
  return {{"gamma_decay", gamma_}, {"scale", scale_}, {"stored", sorted}};
}

VisitCounter VisitCounter::from_json(const nlohmann::json& doc) {
  VisitCounter c(doc.at("gamma_decay").get<double>());
  c.scale_ = doc.at("scale").get<double>();
  for (const auto& [hex, v] : doc.at("stored").items()) c.stored_.emplace(key_from_hex(hex), v.get<double>());
  return c;
}

}  // namespace farlab::curiosity
