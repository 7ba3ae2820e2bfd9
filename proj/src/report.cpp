#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polycarl/studies.hpp"

namespace polycarl {

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw InvalidInput("table " + name + ": row width differs from the header");
  rows.push_back(std::move(row));
}

void StudyResult::require(bool ok, const std::string& what) {
  if (!ok) failures.push_back(what);
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f) throw Error("write failed for " + path.string());
}

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["study"] = c.study;
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json();
  auto opt = [](const auto& o) { return o ? nlohmann::ordered_json(*o) : nlohmann::ordered_json(); };
  j["m"] = opt(c.dim);
  j["d"] = opt(c.degree);
  j["k_max"] = opt(c.k_max);
  j["grid_bits"] = opt(c.grid_bits);
  j["cell_bits"] = opt(c.cell_bits);
  j["bound_factor"] = c.bound_factor;
  j["step_factor"] = c.step_factor;
  j["empty_window"] = c.empty_window;
  j["N"] = c.exponent;
  j["C0"] = c.c0;
  j["D"] = c.counting_bound;
  j["tilde"] = c.tilde_factor;
  j["trials"] = opt(c.trials);
  j["samples"] = opt(c.samples);
  return j;
}

std::string to_json(const StudyResult& r, const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["version"] = kVersionTag;
  j["study"] = r.study;
  j["config"] = config_json(c);
  j["pass"] = r.pass();
  j["failures"] = r.failures;
  j["summary"] = r.summary;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (const auto& t : r.tables) tables.push_back({{"name", t.name}, {"rows", t.rows.size()}});
  j["tables"] = tables;
  return j.dump(2) + "\n";
}

std::string to_svg(const Plot& plot) {
  constexpr double w = 480, h = 320, left = 60, right = 20, top = 30, bottom = 45;
  std::vector<std::pair<double, double>> pts;
  for (auto [x, y] : plot.points)
    if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) pts.emplace_back(std::log10(x), std::log10(y));
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << plot.title << "</text>\n";
  if (pts.empty()) {
    s << "</svg>\n";
    return s.str();
  }
  double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };

  s << "<g stroke=\"black\" font-size=\"10\">\n";
  s << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom
    << "\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom << "\"/>\n";
  for (double t = x0; t <= x1 + 1e-9; t += 1)
    s << "<line x1=\"" << format_number(px(t)) << "\" y1=\"" << h - bottom << "\" x2=\"" << format_number(px(t))
      << "\" y2=\"" << h - bottom + 4 << "\"/><text stroke=\"none\" x=\"" << format_number(px(t)) << "\" y=\""
      << h - bottom + 16 << "\" text-anchor=\"middle\">1e" << format_number(t) << "</text>\n";
  for (double t = y0; t <= y1 + 1e-9; t += 1)
    s << "<line x1=\"" << left - 4 << "\" y1=\"" << format_number(py(t)) << "\" x2=\"" << left << "\" y2=\""
      << format_number(py(t)) << "\"/><text stroke=\"none\" x=\"" << left - 6 << "\" y=\""
      << format_number(py(t) + 3) << "\" text-anchor=\"end\">1e" << format_number(t) << "</text>\n";
  s << "</g>\n";
  s << "<text x=\"" << w / 2 << "\" y=\"" << h - 8 << "\" text-anchor=\"middle\" font-size=\"11\">" << plot.x_label
    << "</text>\n";
  s << "<text x=\"14\" y=\"" << h / 2 << "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 14 "
    << h / 2 << ")\">" << plot.y_label << "</text>\n";
  s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    s << (i ? " " : "") << format_number(px(pts[i].first)) << "," << format_number(py(pts[i].second));
  s << "\"/>\n</svg>\n";
  return s.str();
}

std::vector<std::string> write_artifacts(const StudyResult& r, const ExperimentConfig& c) {
  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::string> paths;
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    write_file(p, text);
    paths.push_back(p.string());
  };
  emit(r.study + ".json", to_json(r, c));
  if (!c.json_only) {
    for (const auto& t : r.tables) emit(r.study + "_" + t.name + ".csv", to_csv(t));
    for (const auto& p : r.plots) emit(r.study + "_" + p.name + ".svg", to_svg(p));
  }
  return paths;
}

}  // namespace polycarl
