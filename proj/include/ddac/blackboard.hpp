#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>

#include "ddac/model.hpp"
#include "ddac/scalar.hpp"

namespace ddac {

// (source, name, mode) addresses one readable value. The same source and name
// may exist independently as a property and as a function output.
struct VarKey {
  std::string source;
  std::string name;
  ValueMode mode = ValueMode::Property;

  friend auto operator<=>(const VarKey&, const VarKey&) = default;
  friend bool operator==(const VarKey&, const VarKey&) = default;
};

inline VarKey key_of(const Condition& c) { return {c.source, c.name, c.mode}; }

// "source.name" for properties, "source.name()" for function outputs.
inline std::string format_address(const VarKey& key) {
  std::string out = key.source + "." + key.name;
  if (key.mode == ValueMode::Function) out += "()";
  return out;
}

inline std::optional<VarKey> parse_address(std::string_view address) {
  auto dot = address.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  VarKey key;
  key.source = std::string(address.substr(0, dot));
  std::string_view rest = address.substr(dot + 1);
  if (rest.size() >= 2 && rest.substr(rest.size() - 2) == "()") {
    key.mode = ValueMode::Function;
    rest.remove_suffix(2);
  }
  key.name = std::string(rest);
  if (!is_valid_identifier(key.source) || !is_valid_identifier(key.name)) return std::nullopt;
  return key;
}

using VarMap = std::map<VarKey, Scalar, std::less<>>;

// Immutable view of the blackboard taken once per tick.
class Snapshot {
 public:
  Snapshot() : entries_(std::make_shared<const VarMap>()) {}
  Snapshot(std::shared_ptr<const VarMap> entries, std::int64_t tick) : entries_(std::move(entries)), tick_(tick) {}

  std::int64_t tick() const { return tick_; }
  const VarMap& entries() const { return *entries_; }
  std::size_t size() const { return entries_->size(); }

  // Absent keys read as std::nullopt; the resolver decides what that means.
  std::optional<Scalar> read(const VarKey& key) const {
    auto it = entries_->find(key);
    if (it == entries_->end()) return std::nullopt;
    return it->second;
  }

  const Scalar* find(const VarKey& key) const {
    auto it = entries_->find(key);
    return it == entries_->end() ? nullptr : &it->second;
  }

 private:
  std::shared_ptr<const VarMap> entries_;
  std::int64_t tick_ = 0;
};

// Registry of externally owned variables and function outputs. Values persist
// until overwritten. Writers must be serialized by the caller.
class Blackboard {
 public:
  // Scalar already guarantees finiteness; the explicit check keeps the
  // contract visible at the write boundary.
  void set(const VarKey& key, const Scalar& value) {
    if (value.is_real() && !std::isfinite(value.as_real())) throw NonFiniteValue();
    auto& slot = mutable_entries()[key];
    slot = value;
  }

  void set(const VarKey& key, double value) {
    if (!std::isfinite(value)) throw NonFiniteValue();
    set(key, Scalar(value));
  }

  bool erase(const VarKey& key) { return mutable_entries().erase(key) > 0; }

  std::optional<Scalar> get(const VarKey& key) const {
    auto it = entries_->find(key);
    if (it == entries_->end()) return std::nullopt;
    return it->second;
  }

  const VarMap& entries() const { return *entries_; }

  // Snapshots share storage with the blackboard until the next write, which
  // copies first.
  Snapshot snapshot(std::int64_t tick) const { return Snapshot(entries_, tick); }

 private:
  VarMap& mutable_entries() {
    if (entries_.use_count() > 1) entries_ = std::make_shared<VarMap>(*entries_);
    return *entries_;
  }

  std::shared_ptr<VarMap> entries_ = std::make_shared<VarMap>();
};

}  // namespace ddac
