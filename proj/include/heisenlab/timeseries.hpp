#pragma once

#include <cstddef>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/error.hpp"
#include "heisenlab/polynomial.hpp"

namespace heisenlab {

/// t_k = t_final * k / (samples - 1) for k = 0..samples-1.
inline std::vector<double> uniform_grid(double t_final, std::size_t samples) {
  if (samples < 2) throw InvalidArgument("time grid needs at least 2 samples");
  if (!(t_final > 0.0)) throw InvalidArgument("time grid needs t_final > 0");
  std::vector<double> t(samples);
  const double denom = static_cast<double>(samples - 1);
  for (std::size_t k = 0; k < samples; ++k)
    t[k] = t_final * (static_cast<double>(k) / denom);
  return t;
}

inline void require_increasing(const std::vector<double>& t, const char* what) {
  if (t.empty()) throw InvalidArgument(std::string(what) + ": empty time grid");
  for (std::size_t k = 1; k < t.size(); ++k)
    if (!(t[k] > t[k - 1]))
      throw InvalidArgument(std::string(what) + ": times must be strictly increasing");
}

/// Named real channels sampled on a shared, strictly increasing time grid.
/// Channels keep their insertion order, which is also the CSV column order.
class TimeSeries {
 public:
  TimeSeries() = default;

  explicit TimeSeries(std::vector<double> times) : times_(std::move(times)) {
    require_increasing(times_, "time series");
  }

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

  void add_channel(std::string name, std::vector<double> values) {
    if (values.size() != times_.size())
      throw InvalidArgument("time series: channel '" + name + "' has " +
                            std::to_string(values.size()) + " samples, expected " +
                            std::to_string(times_.size()));
    if (has_channel(name))
      throw InvalidArgument("time series: duplicate channel '" + name + "'");
    channels_.emplace_back(std::move(name), std::move(values));
  }

  bool has_channel(const std::string& name) const {
    for (const auto& [n, v] : channels_)
      if (n == name) return true;
    return false;
  }

  const std::vector<double>& channel(const std::string& name) const {
    for (const auto& [n, v] : channels_)
      if (n == name) return v;
    throw InvalidArgument("time series: no channel '" + name + "'");
  }

  const std::vector<std::pair<std::string, std::vector<double>>>& channels() const noexcept {
    return channels_;
  }

 private:
  std::vector<double> times_;
  std::vector<std::pair<std::string, std::vector<double>>> channels_;
};

/// Header "t,<channel>..." then one row per sample, 17 significant digits.
inline void write_csv(std::ostream& out, const TimeSeries& ts) {
  out << 't';
  for (const auto& [name, v] : ts.channels()) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out << format_real(ts.times()[k]);
    for (const auto& [name, v] : ts.channels()) out << ',' << format_real(v[k]);
    out << '\n';
  }
}

inline std::string to_csv(const TimeSeries& ts) {
  std::ostringstream s;
  write_csv(s, ts);
  return s.str();
}

/// Inverse of write_csv. The first column must be named "t".
inline TimeSeries parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("csv: empty input");
  std::vector<std::string> names;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) names.push_back(cell);
  }
  if (names.empty() || names[0] != "t")
    throw InvalidArgument("csv: first column must be 't'");
  std::vector<std::vector<double>> cols(names.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= names.size()) throw InvalidArgument("csv: too many cells in a row");
      cols[c++].push_back(parse_real(cell, "csv"));
    }
    if (c != names.size()) throw InvalidArgument("csv: short row");
  }
  TimeSeries ts(std::move(cols[0]));
  for (std::size_t c = 1; c < names.size(); ++c)
    ts.add_channel(names[c], std::move(cols[c]));
  return ts;
}

}  // namespace heisenlab
