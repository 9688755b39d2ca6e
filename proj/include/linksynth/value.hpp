#ifndef LINKSYNTH_VALUE_HPP
#define LINKSYNTH_VALUE_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linksynth/errors.hpp"

namespace linksynth {

// Global intern pool. Pointers are stable for the process lifetime, so string
// equality is pointer equality. Ordering always compares content (pointer
// order would not be reproducible across runs).
class StringPool {
 public:
  static const std::string* intern(std::string_view s) {
    auto& p = instance();
    std::lock_guard<std::mutex> lock(p.mu_);
    auto it = p.index_.find(s);
    if (it != p.index_.end()) return it->second;
    p.storage_.emplace_back(s);
    const std::string* ptr = &p.storage_.back();
    p.index_.emplace(*ptr, ptr);
    return ptr;
  }

 private:
  static StringPool& instance() {
    static StringPool pool;
    return pool;
  }
  std::mutex mu_;
  std::deque<std::string> storage_;
  std::unordered_map<std::string_view, const std::string*> index_;
};

// A cell: null, int64, or interned string.
class Value {
 public:
  enum class Kind : uint8_t { Null, Int, Str };

  Value() : kind_(Kind::Null), num_(0), str_(nullptr) {}
  static Value null() { return Value(); }
  static Value ofInt(int64_t v) {
    Value x;
    x.kind_ = Kind::Int;
    x.num_ = v;
    return x;
  }
  static Value ofStr(std::string_view s) {
    Value x;
    x.kind_ = Kind::Str;
    x.str_ = StringPool::intern(s);
    return x;
  }

  Kind kind() const { return kind_; }
  bool isNull() const { return kind_ == Kind::Null; }
  bool isInt() const { return kind_ == Kind::Int; }
  bool isStr() const { return kind_ == Kind::Str; }

  int64_t asInt() const {
    if (kind_ != Kind::Int) fail(Errc::TypeMismatch, "value is not an integer");
    return num_;
  }
  const std::string& asStr() const {
    if (kind_ != Kind::Str) fail(Errc::TypeMismatch, "value is not a string");
    return *str_;
  }

  bool operator==(const Value& o) const {
    if (kind_ != o.kind_) return false;
    switch (kind_) {
      case Kind::Null: return true;
      case Kind::Int: return num_ == o.num_;
      case Kind::Str: return str_ == o.str_;
    }
    return false;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }

  // Total order used for deterministic tie-breaks: null < ints < strings.
  bool operator<(const Value& o) const {
    if (kind_ != o.kind_) return static_cast<int>(kind_) < static_cast<int>(o.kind_);
    switch (kind_) {
      case Kind::Null: return false;
      case Kind::Int: return num_ < o.num_;
      case Kind::Str: return str_ != o.str_ && *str_ < *o.str_;
    }
    return false;
  }

  size_t hash() const {
    switch (kind_) {
      case Kind::Null: return 0x9e3779b97f4a7c15ull;
      case Kind::Int: return std::hash<int64_t>()(num_);
      case Kind::Str: return std::hash<const void*>()(str_);
    }
    return 0;
  }

  // CSV/debug rendering; null renders empty.
  std::string toText() const {
    switch (kind_) {
      case Kind::Null: return "";
      case Kind::Int: return std::to_string(num_);
      case Kind::Str: return *str_;
    }
    return "";
  }

 private:
  Kind kind_;
  int64_t num_;
  const std::string* str_;
};

struct ValueHash {
  size_t operator()(const Value& v) const { return v.hash(); }
};

struct ValueVecHash {
  size_t operator()(const std::vector<Value>& vs) const {
    size_t h = 1469598103934665603ull;
    for (const auto& v : vs) {
      h ^= v.hash();
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace linksynth

#endif
