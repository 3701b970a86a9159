#include "gaplm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <set>

#include "gaplm/error.hpp"
#include "gaplm/log.hpp"

namespace gaplm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_number(const std::string& s) {
  if (s.empty()) return kNaN;
  double v = 0.0;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return kNaN;
  return v;
}

bool all_numeric(const std::vector<std::string>& fields) {
  return std::all_of(fields.begin(), fields.end(), [](const std::string& f) { return !std::isnan(parse_number(f)); });
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd out;
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::vector<std::string>& names) {
  CsvTable table;
  std::string line;
  bool first = true;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_record(line);
    if (first) {
      first = false;
      if (names.empty()) {
        table.header = std::move(fields);
        table.columns.resize(table.header.size());
        continue;
      }
      table.header = names;
      table.columns.resize(names.size());
      if (!all_numeric(fields)) continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError("csv line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(table.header.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) table.columns[j].push_back(parse_number(fields[j]));
  }
  if (table.header.empty()) throw DataError("csv input is empty");
  return table;
}

void Dataset::transform_row(const std::vector<double>& raw_smooth, const std::vector<double>& raw_linear,
                            Eigen::VectorXd& x_unit_out, Eigen::VectorXd& z_out) const {
  if (raw_smooth.size() != smooth.size() || raw_linear.size() != linear.size()) {
    throw ConfigError("transform_row: value count does not match the dataset columns");
  }
  x_unit_out.resize(static_cast<Eigen::Index>(smooth.size()));
  z_out.resize(static_cast<Eigen::Index>(linear.size()));
  for (std::size_t a = 0; a < smooth.size(); ++a) {
    x_unit_out(static_cast<Eigen::Index>(a)) = smooth[a].unit(smooth[a].standardize(raw_smooth[a]));
  }
  for (std::size_t j = 0; j < linear.size(); ++j) {
    z_out(static_cast<Eigen::Index>(j)) = linear[j].standardize(raw_linear[j]);
  }
}

Dataset Dataset::without_row(int i) const {
  if (i < 0 || i >= n()) throw ConfigError("without_row: index out of range");
  Dataset out = *this;
  const Eigen::Index m = n() - 1;
  const auto drop_rows = [&](const Eigen::MatrixXd& a) {
    Eigen::MatrixXd b(m, a.cols());
    b.topRows(i) = a.topRows(i);
    b.bottomRows(m - i) = a.bottomRows(m - i);
    return b;
  };
  out.y = drop_rows(y);
  out.x_unit = drop_rows(x_unit);
  out.z = drop_rows(z);
  return out;
}

Dataset prepare_dataset(const CsvTable& table, const DatasetConfig& config) {
  config.linear.validate();
  std::vector<std::string> used{config.response};
  used.insert(used.end(), config.smooth.begin(), config.smooth.end());
  const auto lin = config.linear.all();
  used.insert(used.end(), lin.begin(), lin.end());
  if (config.response.empty()) throw ConfigError("no response column given");
  std::set<std::string> seen;
  std::vector<int> idx;
  for (const auto& name : used) {
    if (!seen.insert(name).second) throw ConfigError("column '" + name + "' is used more than once");
    const int j = table.column(name);
    if (j < 0) throw ConfigError("unknown column '" + name + "'");
    idx.push_back(j);
  }
  std::set<int> zero_cols;
  for (const auto& name : config.zero_missing) {
    const int j = table.column(name);
    if (j < 0) throw ConfigError("unknown column '" + name + "' in zero-as-missing list");
    zero_cols.insert(j);
  }

  std::vector<int> keep;
  for (int i = 0; i < table.rows(); ++i) {
    bool ok = true;
    for (int j : idx) {
      const double v = table.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      if (!std::isfinite(v) || (zero_cols.count(j) && v == 0.0)) ok = false;
    }
    if (ok) keep.push_back(i);
  }

  Dataset data;
  data.family = QuasiFamily::from_name(config.family);
  data.partition = config.linear;
  data.rows_read = table.rows();
  data.rows_dropped = table.rows() - static_cast<int>(keep.size());
  if (data.rows_dropped > 0) {
    warn("dropped " + std::to_string(data.rows_dropped) + " of " + std::to_string(data.rows_read) +
         " rows with missing or non-numeric values");
  }
  if (keep.empty()) throw DataError("no usable rows in the data");

  const auto gather = [&](int j) {
    std::vector<double> v;
    v.reserve(keep.size());
    for (int i : keep) v.push_back(table.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
    return v;
  };

  const auto n = static_cast<Eigen::Index>(keep.size());
  data.y.resize(n);
  const auto yv = gather(idx[0]);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.y(i) = yv[static_cast<std::size_t>(i)];
    if (!data.family.in_support(data.y(i))) {
      throw DataError("response '" + config.response + "' value " + std::to_string(data.y(i)) +
                      " is outside the support of " + data.family.name());
    }
  }

  const auto make_transform = [&](const std::string& name, const std::vector<double>& v) {
    const MeanSd ms = mean_sd(v);
    if (!(ms.sd > 0.0)) throw DataError("column '" + name + "' is constant");
    ColumnTransform t;
    t.name = name;
    if (config.standardize) {
      t.center = ms.mean;
      t.scale = ms.sd;
    }
    return t;
  };

  data.x_unit.resize(n, static_cast<Eigen::Index>(config.smooth.size()));
  for (std::size_t a = 0; a < config.smooth.size(); ++a) {
    const auto v = gather(idx[1 + a]);
    ColumnTransform t = make_transform(config.smooth[a], v);
    t.lower = std::numeric_limits<double>::infinity();
    t.upper = -t.lower;
    for (double x : v) {
      t.lower = std::min(t.lower, t.standardize(x));
      t.upper = std::max(t.upper, t.standardize(x));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      data.x_unit(i, static_cast<Eigen::Index>(a)) =
          std::clamp(t.unit(t.standardize(v[static_cast<std::size_t>(i)])), 0.0, 1.0);
    }
    data.smooth.push_back(t);
  }

  data.z.resize(n, static_cast<Eigen::Index>(lin.size()));
  for (std::size_t j = 0; j < lin.size(); ++j) {
    const auto v = gather(idx[1 + config.smooth.size() + j]);
    const ColumnTransform t = make_transform(lin[j], v);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.z(i, static_cast<Eigen::Index>(j)) = t.standardize(v[static_cast<std::size_t>(i)]);
    }
    data.linear.push_back(t);
  }
  return data;
}

Dataset load_csv(std::istream& in, const DatasetConfig& config) {
  return prepare_dataset(read_csv(in, config.names), config);
}

Dataset load_csv(const DatasetConfig& config) {
  std::ifstream in(config.path);
  if (!in) throw ConfigError("cannot open data file '" + config.path + "'");
  return load_csv(in, config);
}

}  // namespace gaplm
