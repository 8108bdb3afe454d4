#include "bmc/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bmc {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

void Manifest::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of("=\n") != std::string::npos) {
    throw std::invalid_argument("bad manifest key '" + key + "'");
  }
  if (value.find('\n') != std::string::npos) throw std::invalid_argument("manifest values are single-line");
  for (auto& [k, v] : items_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }

void Manifest::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

std::optional<std::string> Manifest::find(const std::string& key) const {
  for (const auto& [k, v] : items_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Manifest::get(const std::string& key) const {
  auto v = find(key);
  if (!v) throw std::out_of_range("manifest has no key '" + key + "'");
  return *v;
}

double Manifest::get_double(const std::string& key) const {
  const std::string text = get(key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("manifest key '" + key + "' is not a number: " + text);
  }
  return v;
}

std::uint64_t Manifest::get_u64(const std::string& key) const {
  const std::string text = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument("manifest key '" + key + "' is not an unsigned integer: " + text);
  }
  return v;
}

std::string Manifest::serialize() const {
  std::ostringstream out;
  for (const auto& [k, v] : items_) out << k << " = " << v << '\n';
  return out.str();
}

Manifest Manifest::parse(const std::string& text) {
  Manifest m;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw std::invalid_argument("manifest line " + std::to_string(n) + " has no ' = '");
    m.set(line.substr(0, eq), line.substr(eq + 3));
  }
  return m;
}

void Manifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << serialize();
}

Manifest Manifest::read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace bmc
