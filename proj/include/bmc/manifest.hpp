#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bmc {

// Ordered key-value record of a run, written as `key = value` lines.
class Manifest {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::uint64_t>(value)); }

  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws when missing
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

  std::string serialize() const;
  static Manifest parse(const std::string& text);
  void write(const std::string& path) const;
  static Manifest read(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace bmc
