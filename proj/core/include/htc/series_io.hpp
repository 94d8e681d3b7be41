#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "htc/observables.hpp"

namespace htc {

/// Number formatting used by every table: 12 significant digits.
std::string format_number(double v);

void write_series_csv(const std::filesystem::path& path, const ObservableTimeSeries& series);
ObservableTimeSeries read_series_csv(const std::filesystem::path& path);

/// Mean columns followed by one <name>_se column per mean column, then the
/// realization count per row.
void write_average_csv(const std::filesystem::path& path, const AveragedSeries& avg);

/// Generic table writer; rows must match the header width.
void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
Table read_table_csv(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace htc
