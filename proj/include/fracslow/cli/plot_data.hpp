#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"

namespace fracslow::cli {

/// One row of the long-format plot table.
struct PlotRow {
  std::string experiment;
  std::string series;
  double x = 0.0;
  double y = 0.0;
  std::optional<double> se;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(where + ": '" + s + "' is not a number");
  }
}

inline double json_number(const nlohmann::json& v) { return v.is_null() ? std::nan("") : v.get<double>(); }

inline void add_curve(std::vector<PlotRow>& out, const std::string& exp, const nlohmann::json& c) {
  const auto& t = c.at("times");
  const auto& d = c.at("distances");
  const auto& se = c.at("se");
  if (t.size() != d.size() || t.size() != se.size()) throw SchemaError("curve arrays differ in length");
  const std::string series = c.at("metric").get<std::string>();
  for (std::size_t i = 0; i < t.size(); ++i) out.push_back({exp, series, json_number(t[i]), json_number(d[i]), json_number(se[i])});
}

inline void rows_from_result(std::vector<PlotRow>& out, const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const std::string exp = j.at("name").get<std::string>();
  const auto& r = j.at("result");
  if (kind == "wasserstein-decay" || kind == "quenched-decay") {
    add_curve(out, exp, r.at("curve"));
  } else if (kind == "tv-decay") {
    for (const char* k : {"bound", "histogram", "gap"}) add_curve(out, exp, r.at(k));
  } else if (kind == "averaging") {
    for (const auto& row : r.at("rows")) {
      const double eps = row.at("epsilon").get<double>();
      for (const char* stat : {"sup", "holder"}) {
        const auto& ci = row.at(std::string(stat) + "_ci");
        // 95% percentile interval -> normal-equivalent SE
        const double se = (json_number(ci[1]) - json_number(ci[0])) / (2.0 * 1.959963984540054);
        out.push_back({exp, std::string("median_") + stat, eps, json_number(row.at(std::string("median_") + stat)), se});
        out.push_back({exp, std::string("q25_") + stat, eps, json_number(row.at(std::string("q25_") + stat)), std::nullopt});
        out.push_back({exp, std::string("q75_") + stat, eps, json_number(row.at(std::string("q75_") + stat)), std::nullopt});
      }
    }
  } else if (kind == "noise-validate") {
    for (const auto& row : r.at("residuals")) {
      const std::string s = row.at("statistic").get<std::string>() + " H=" + format_double(row.at("hurst").get<double>());
      const double lag = row.at("lag").get<double>();
      out.push_back({exp, s, lag, json_number(row.at("empirical")), json_number(row.at("se"))});
      out.push_back({exp, s + " expected", lag, json_number(row.at("expected")), std::nullopt});
    }
  } else if (kind == "control") {
    const auto& runs = r.at("runs");
    for (std::size_t i = 0; i < runs.size(); ++i)
      out.push_back({exp, "occupation", static_cast<double>(i), json_number(runs[i].at("occupation")), std::nullopt});
  } else if (kind == "invariant-measure") {
    const auto& comps = r.at("components");
    for (std::size_t k = 0; k < comps.size(); ++k) {
      out.push_back({exp, "mean", static_cast<double>(k), json_number(comps[k].at("mean")), json_number(comps[k].at("mean_se"))});
      out.push_back(
          {exp, "variance", static_cast<double>(k), json_number(comps[k].at("variance")), json_number(comps[k].at("variance_se"))});
    }
  } else if (kind == "certify-drift") {
    out.push_back({exp, "worst_margin", 0.0, json_number(r.at("worst_margin")), std::nullopt});
  } else {
    throw SchemaError("unknown result kind '" + kind + "'");
  }
}

// Bare CSV outputs: a DecayCurve file (t,distance,se) or an averaging report.
inline void rows_from_csv(std::vector<PlotRow>& out, std::istream& in, const std::string& exp, const std::string& where) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      const bool curve = header == std::vector<std::string>{"t", "distance", "se"};
      const bool report = !header.empty() && header[0] == "epsilon";
      if (!curve && !report) throw SchemaError(where + ": unrecognised CSV header '" + line + "'");
      continue;
    }
    if (cells.size() != header.size()) throw SchemaError(where + ":" + std::to_string(line_no) + ": wrong number of fields");
    const std::string at = where + ":" + std::to_string(line_no);
    if (header[0] == "t") {
      out.push_back({exp, "distance", parse_number(cells[0], at), parse_number(cells[1], at), parse_number(cells[2], at)});
    } else {
      const double eps = parse_number(cells[0], at);
      for (std::size_t k = 1; k < header.size(); ++k) out.push_back({exp, header[k], eps, parse_number(cells[k], at), std::nullopt});
    }
  }
  if (header.empty()) throw SchemaError(where + ": empty file");
}

}  // namespace detail

/// Collects plot rows from result directories, result.json files, or bare
/// curve / report CSVs. Anything else is rejected as corrupt.
inline std::vector<PlotRow> collect_plot_rows(const std::vector<std::string>& inputs) {
  namespace fs = std::filesystem;
  std::vector<PlotRow> out;
  for (const auto& input : inputs) {
    fs::path path = input;
    if (fs::is_directory(path)) path /= "result.json";
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read '" + path.string() + "'");
    if (path.extension() == ".csv") {
      const std::string exp = path.parent_path().filename().string() + "/" + path.stem().string();
      detail::rows_from_csv(out, in, exp, path.string());
      continue;
    }
    try {
      detail::rows_from_result(out, nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + ": corrupt result file (" + e.what() + ")");
    } catch (const SchemaError& e) {
      throw SchemaError(path.string() + ": " + e.what());
    }
  }
  return out;
}

inline void write_plot_csv(std::ostream& os, const std::vector<PlotRow>& rows) {
  os << "experiment,series,x,y,se\n";
  auto cell = [](double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); };
  for (const auto& r : rows) os << r.experiment << ',' << r.series << ',' << cell(r.x) << ',' << cell(r.y) << ',' << (r.se ? cell(*r.se) : "") << '\n';
}

inline std::string emit_plot_data(const std::vector<std::string>& inputs) {
  std::ostringstream os;
  write_plot_csv(os, collect_plot_rows(inputs));
  return os.str();
}

}  // namespace fracslow::cli
