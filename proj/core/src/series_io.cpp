#include "htc/series_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "htc/error.hpp"

namespace htc {

namespace fs = std::filesystem;

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_failure, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io_failure, "failed writing " + path.string());
}

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
  out << '\n';
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_series_csv(const fs::path& path, const ObservableTimeSeries& series) {
  auto out = open_out(path);
  write_row(out, column_names(series.n_molecules));
  for (const auto& r : series.records) {
    std::vector<std::string> cells;
    for (double v : flatten(r)) cells.push_back(format_number(v));
    write_row(out, cells);
  }
  finish(out, path);
}

ObservableTimeSeries read_series_csv(const fs::path& path) {
  const Table t = read_table_csv(path);
  const std::size_t fixed = 8;
  if (t.header.size() < fixed + 3 || (t.header.size() - fixed) % 3 != 0)
    throw Error(ErrorCode::io_failure, "unexpected series header in " + path.string());
  ObservableTimeSeries s;
  s.n_molecules = static_cast<int>((t.header.size() - fixed) / 3);
  if (t.header != column_names(s.n_molecules)) throw Error(ErrorCode::io_failure, "unexpected series header in " + path.string());
  const auto n = static_cast<std::size_t>(s.n_molecules);
  for (const auto& row : t.rows) {
    std::vector<double> v;
    try {
      for (const auto& c : row) v.push_back(std::stod(c));
    } catch (const std::exception&) {
      throw Error(ErrorCode::io_failure, "non-numeric cell in " + path.string());
    }
    ObservableRecord r;
    r.t = v[0];
    r.s_vib = v[1];
    r.n_ph = v[2];
    r.eta_l = v[3];
    r.eta_r = v[4];
    r.norm = v[5];
    r.trunc = v[6];
    r.max_bond = static_cast<int>(v[7]);
    r.n_exc.assign(v.begin() + fixed, v.begin() + fixed + n);
    r.x.assign(v.begin() + fixed + n, v.begin() + fixed + 2 * n);
    r.p.assign(v.begin() + fixed + 2 * n, v.begin() + fixed + 3 * n);
    s.records.push_back(std::move(r));
  }
  return s;
}

void write_average_csv(const fs::path& path, const AveragedSeries& avg) {
  std::vector<std::string> header = avg.columns;
  for (const auto& c : avg.columns) header.push_back(c + "_se");
  header.emplace_back("count");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < avg.mean.size(); ++i) {
    std::vector<std::string> cells;
    for (double v : avg.mean[i]) cells.push_back(format_number(v));
    for (double v : avg.stderr_[i]) cells.push_back(format_number(v));
    cells.push_back(std::to_string(avg.count));
    rows.push_back(std::move(cells));
  }
  write_table_csv(path, header, rows);
}

void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  write_row(out, header);
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw Error(ErrorCode::dimension_mismatch, "row width does not match header");
    write_row(out, r);
  }
  finish(out, path);
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::io_failure, "missing column " + name);
}

Table read_table_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::io_failure, "empty table " + path.string());
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw Error(ErrorCode::io_failure, "ragged row in " + path.string());
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::io_failure, "malformed JSON in " + path.string() + ": " + e.what());
  }
}

}  // namespace htc
