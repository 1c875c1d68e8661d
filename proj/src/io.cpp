#include "dynrank/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dynrank/errors.hpp"

namespace dynrank {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double_or_throw(const std::string& s, int line_no, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InvalidArgument("line " + std::to_string(line_no) + ": malformed " + what +
                          " '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ComparisonDataset read_comparison_csv(const std::string& path,
                                      std::optional<double> horizon) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  ComparisonDataset ds;
  std::unordered_map<std::string, int> id_of;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  double max_time = 0.0;
  std::optional<double> stored_horizon;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      // the writer stashes the horizon as a comment so round trips keep it
      const std::string tag = "# horizon=";
      if (line.rfind(tag, 0) == 0)
        stored_horizon = parse_double_or_throw(line.substr(tag.size()), line_no, "horizon");
      continue;
    }
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "item_i" || fields[1] != "item_j" ||
          fields[2] != "time" || fields[3] != "outcome")
        throw InvalidArgument("line " + std::to_string(line_no) +
                              ": expected header item_i,item_j,time,outcome");
      continue;
    }
    if (fields.size() != 4)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                            std::to_string(fields.size()));
    auto intern = [&](const std::string& name) {
      auto [it, inserted] = id_of.try_emplace(name, static_cast<int>(ds.labels.size()));
      if (inserted) ds.labels.push_back(name);
      return it->second;
    };
    ComparisonRecord rec;
    if (fields[0].empty() || fields[1].empty())
      throw InvalidArgument("line " + std::to_string(line_no) + ": empty item name");
    rec.item_i = intern(fields[0]);
    rec.item_j = intern(fields[1]);
    if (rec.item_i == rec.item_j)
      throw InvalidArgument("line " + std::to_string(line_no) +
                            ": item compared against itself ('" + fields[0] + "')");
    rec.time = parse_double_or_throw(fields[2], line_no, "time");
    if (fields[3] == "0")
      rec.outcome = 0;
    else if (fields[3] == "1")
      rec.outcome = 1;
    else
      throw InvalidArgument("line " + std::to_string(line_no) + ": malformed outcome '" +
                            fields[3] + "' (must be 0 or 1)");
    max_time = std::max(max_time, rec.time);
    ds.records.push_back(rec);
  }
  if (!header_seen) throw InvalidArgument("'" + path + "' is empty");
  ds.n = static_cast<int>(ds.labels.size());
  // explicit argument > stored comment > last observed time
  ds.horizon = horizon ? *horizon
                       : stored_horizon.value_or(max_time > 0.0 ? max_time : 1.0);
  return ds;
}

void write_comparison_csv(const std::string& path, const ComparisonDataset& ds,
                          const std::map<std::string, std::string>& provenance) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << "# horizon=" << format_double(ds.horizon) << "\n";
  for (const auto& [k, v] : provenance)
    if (k != "horizon") out << "# " << k << "=" << v << "\n";
  out << "item_i,item_j,time,outcome\n";
  auto label = [&](int id) {
    return ds.labels.empty() ? "item_" + std::to_string(id) : ds.labels[id];
  };
  for (const ComparisonRecord& rec : ds.records)
    out << label(rec.item_i) << "," << label(rec.item_j) << "," << format_double(rec.time)
        << "," << rec.outcome << "\n";
}

void write_trajectory_csv(const std::string& path, const ScoreTrajectory& trajectory,
                          const std::vector<std::string>& labels,
                          const std::map<std::string, std::string>& provenance) {
  const int n = static_cast<int>(trajectory.scores.cols());
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw InvalidArgument("write_trajectory_csv: " + std::to_string(labels.size()) +
                          " labels for " + std::to_string(n) + " columns");
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  for (const auto& [k, v] : provenance) out << "# " << k << "=" << v << "\n";
  out << "time";
  for (int i = 0; i < n; ++i)
    out << "," << (labels.empty() ? "item_" + std::to_string(i) : labels[i]);
  out << "\n";
  for (int k = 0; k < trajectory.grid.size(); ++k) {
    out << format_double(trajectory.grid.points[k]);
    for (int i = 0; i < n; ++i) out << "," << format_double(trajectory.scores(k, i));
    out << "\n";
  }
}

ScoreTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  int n = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 2 || fields[0] != "time")
        throw InvalidArgument("line " + std::to_string(line_no) +
                              ": expected header time,<labels...>");
      n = static_cast<int>(fields.size()) - 1;
      continue;
    }
    if (static_cast<int>(fields.size()) != n + 1)
      throw InvalidArgument("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(n + 1) + " fields");
    times.push_back(parse_double_or_throw(fields[0], line_no, "time"));
    std::vector<double> row(n);
    for (int i = 0; i < n; ++i)
      row[i] = parse_double_or_throw(fields[i + 1], line_no, "score");
    rows.push_back(std::move(row));
  }
  if (!header_seen || rows.empty())
    throw InvalidArgument("'" + path + "' holds no trajectory rows");
  ScoreTrajectory tr;
  tr.grid.points = times;
  tr.grid.a = times.front();
  tr.grid.b = times.back();
  tr.scores.resize(rows.size(), n);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (int i = 0; i < n; ++i) tr.scores(k, i) = rows[k][i];
  return tr;
}

}  // namespace dynrank
