#include "bmc/movielens.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "bmc/rng.hpp"

namespace bmc {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("malformed ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::vector<RatingRecord> parse_movielens(std::istream& in) {
  std::vector<RatingRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string_view> fields;
    const std::string_view view(text);
    for (std::size_t pos = 0;;) {
      const std::size_t tab = view.find('\t', pos);
      fields.push_back(view.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
      if (tab == std::string_view::npos) break;
      pos = tab + 1;
    }
    if (fields.size() != 4) {
      throw ParseError(line, "expected 4 tab-separated fields, found " + std::to_string(fields.size()));
    }
    RatingRecord r;
    r.user = parse_field<int>(fields[0], line, "user id");
    r.item = parse_field<int>(fields[1], line, "item id");
    r.rating = parse_field<int>(fields[2], line, "rating");
    r.timestamp = parse_field<std::int64_t>(fields[3], line, "timestamp");
    if (r.user < 1 || r.item < 1) throw ParseError(line, "ids must be positive");
    if (r.rating < 1 || r.rating > 5) {
      throw ParseError(line, "rating " + std::to_string(r.rating) + " outside 1..5");
    }
    records.push_back(r);
  }
  return records;
}

std::vector<RatingRecord> load_movielens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file '" + path + "'");
  return parse_movielens(in);
}

MatrixShape shape_of(const std::vector<RatingRecord>& records) {
  MatrixShape s;
  for (const auto& r : records) {
    s.users = std::max(s.users, static_cast<std::size_t>(r.user));
    s.items = std::max(s.items, static_cast<std::size_t>(r.item));
  }
  return s;
}

std::vector<RatingRecord> deduplicate(const std::vector<RatingRecord>& records) {
  std::unordered_map<std::uint64_t, std::size_t> slot;
  std::vector<RatingRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const std::uint64_t key = (static_cast<std::uint64_t>(r.user) << 32) | static_cast<std::uint32_t>(r.item);
    auto [it, inserted] = slot.emplace(key, out.size());
    if (inserted) {
      out.push_back(r);
    } else {
      out[it->second] = r;
    }
  }
  return out;
}

double mean_rating(const std::vector<RatingRecord>& records) {
  if (records.empty()) throw std::invalid_argument("mean of an empty rating set");
  std::int64_t sum = 0;
  for (const auto& r : records) sum += r.rating;
  return static_cast<double>(sum) / static_cast<double>(records.size());
}

BinarizedRatings binarize(const std::vector<RatingRecord>& records, std::optional<double> threshold,
                          MatrixShape shape) {
  if (records.empty()) throw std::invalid_argument("binarize: no records");
  BinarizedRatings out;
  out.threshold = threshold.value_or(mean_rating(records));
  out.observation = TernaryObservation(shape.users, shape.items);
  for (const auto& r : deduplicate(records)) {
    out.observation.add(static_cast<std::size_t>(r.user - 1), static_cast<std::size_t>(r.item - 1),
                        r.rating > out.threshold ? 1 : -1);
    out.ratings.push_back(r.rating);
  }
  return out;
}

RatingSplit split(const std::vector<RatingRecord>& records, const SplitSpec& spec) {
  std::vector<RatingRecord> unique = deduplicate(records);
  if (spec.n_validation + spec.n_test >= unique.size() && spec.n_validation + spec.n_test > 0) {
    throw std::invalid_argument("split: validation + test sizes leave no training records");
  }
  // Seeded Fisher-Yates over record positions.
  std::vector<std::size_t> order(unique.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const CounterRng rng = stream(spec.seed, "split");
  for (std::size_t t = order.size(); t > 1; --t) {
    const auto j = static_cast<std::size_t>(rng.uniform(t) * static_cast<double>(t));
    std::swap(order[t - 1], order[std::min(j, t - 1)]);
  }
  std::vector<int> part(unique.size(), 0);
  for (std::size_t t = 0; t < spec.n_validation; ++t) part[order[t]] = 1;
  for (std::size_t t = spec.n_validation; t < spec.n_validation + spec.n_test; ++t) part[order[t]] = 2;
  RatingSplit out;
  for (std::size_t t = 0; t < unique.size(); ++t) {
    (part[t] == 0 ? out.train : part[t] == 1 ? out.validation : out.test).push_back(unique[t]);
  }
  return out;
}

std::size_t SignErrorTable::total() const { return std::accumulate(count.begin(), count.end(), std::size_t{0}); }

double SignErrorTable::rate(int rating) const {
  const auto b = static_cast<std::size_t>(rating - 1);
  return count.at(b) == 0 ? 0.0 : static_cast<double>(wrong[b]) / static_cast<double>(count[b]);
}

double SignErrorTable::overall() const {
  const std::size_t n = total();
  const std::size_t w = std::accumulate(wrong.begin(), wrong.end(), std::size_t{0});
  return n == 0 ? 0.0 : static_cast<double>(w) / static_cast<double>(n);
}

std::string SignErrorTable::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17) << "rating,count,error\n";
  for (int r = 1; r <= 5; ++r) out << r << ',' << count[static_cast<std::size_t>(r - 1)] << ',' << rate(r) << '\n';
  out << "overall," << total() << ',' << overall() << '\n';
  return out.str();
}

SignErrorTable sign_accuracy(const DenseMatrix& estimate, const std::vector<RatingRecord>& heldout,
                             double threshold, const Qpf& q, double offset) {
  if (heldout.empty()) throw std::invalid_argument("sign_accuracy: empty held-out set");
  SignErrorTable table;
  for (const auto& r : heldout) {
    const auto i = static_cast<Eigen::Index>(r.user - 1);
    const auto j = static_cast<Eigen::Index>(r.item - 1);
    if (i >= estimate.rows() || j >= estimate.cols()) {
      throw std::out_of_range("sign_accuracy: held-out cell outside the estimate");
    }
    const int label = r.rating > threshold ? 1 : -1;
    const int predicted = q.value(estimate(i, j) - offset) >= 0.5 ? 1 : -1;
    const auto b = static_cast<std::size_t>(r.rating - 1);
    ++table.count[b];
    table.wrong[b] += (predicted != label);
  }
  return table;
}

}  // namespace bmc
