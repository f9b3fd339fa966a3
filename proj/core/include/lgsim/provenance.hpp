#pragma once

#include <map>
#include <sstream>
#include <string>

namespace lgsim {

// Flat key/value record of the parameters that produced a data product.
// Values are stored as text; numbers use full round-trip precision.
class Provenance {
 public:
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, const char* value) { entries_[key] = value; }
  void set(const std::string& key, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    entries_[key] = os.str();
  }
  void set(const std::string& key, long long value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, int value) { entries_[key] = std::to_string(value); }
  void set(const std::string& key, std::size_t value) { entries_[key] = std::to_string(value); }

  void merge(const Provenance& other) {
    for (const auto& [k, v] : other.entries_) entries_[k] = v;
  }

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& at(const std::string& key) const { return entries_.at(key); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace lgsim
