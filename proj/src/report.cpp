#include <fstream>
#include <sstream>

#include "pcsft/errors.hpp"
#include "pcsft/experiment.hpp"

namespace pcsft {

namespace {

Json verdict_json(const Verdict& v) {
  return Json{{"name", v.name}, {"pass", v.pass}, {"measured", v.measured}, {"threshold", v.threshold}, {"detail", v.detail}};
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << contents;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

bool Report::all_pass() const {
  if (error) return false;
  for (const auto& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

Json Report::results_json() const {
  Json verdict_list = Json::array();
  for (const auto& v : verdicts) verdict_list.push_back(verdict_json(v));
  Json plot_list = Json::array();
  for (const auto& p : plots) {
    Json rows = Json::array();
    for (const auto& r : p.rows) {
      Json row = Json::array();
      for (double x : r) row.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
      rows.push_back(std::move(row));
    }
    plot_list.push_back(Json{{"name", p.name}, {"header", p.header}, {"rows", std::move(rows)}});
  }
  return Json{{"experiment", experiment},
              {"config_digest", config_digest},
              {"config", config},
              {"per_seed", per_seed},
              {"aggregate", aggregate},
              {"verdicts", std::move(verdict_list)},
              {"plots", std::move(plot_list)},
              {"error", error ? Json(*error) : Json(nullptr)},
              {"all_pass", all_pass()}};
}

Json Report::to_json() const {
  Json j = results_json();
  j["timings"] = timings;
  return j;
}

std::string render_report_json(const Report& report) { return report.to_json().dump(2) + "\n"; }

std::string render_csv(const PlotTable& table) {
  std::ostringstream os;
  for (std::size_t i = 0; i < table.header.size(); ++i) os << (i ? "," : "") << table.header[i];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      if (std::isfinite(row[i])) os << format_double(row[i]);
    }
    os << '\n';
  }
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const Report& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::json) {
    const auto path = dir / "report.json";
    write_file(path, render_report_json(report));
    written.push_back(path);
  } else {
    for (const auto& table : report.plots) {
      const auto path = dir / (table.name + ".csv");
      write_file(path, render_csv(table));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace pcsft
